#include "fracsing/config.hpp"
#include "fracsing/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace fracsing;
namespace fs = std::filesystem;

namespace {

std::string field_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

fs::path scratch(const std::string& name)
{
    fs::path dir = fs::temp_directory_path() / ("fracsing_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(Config, DefaultsFilled)
{
    const RunConfig c = parse_config(R"({"problem": {"p": 2, "s": 0.5, "gamma": 1}})");
    EXPECT_EQ(c.problem.N, 1);
    EXPECT_EQ(c.problem.domain.shape, DomainShape::Interval);
    EXPECT_EQ(c.problem.domain.M, std::vector<long>{129});
    EXPECT_EQ(c.solver.outer_tol, 1e-7);
    EXPECT_TRUE(c.verify.checks.empty());
    EXPECT_FALSE(c.sweep.has_value());
}

TEST(Config, RoundTrip)
{
    const std::string texts[] = {
        R"({"problem": {"p": 2, "s": 0.5, "gamma": 1}})",
        R"({"problem": {"p": 3, "s": 0.2, "gamma": 2, "N": 2,
            "domain": {"shape": "ball", "radius": 1.5, "M": 17},
            "source": {"profile": "gaussian", "sigma": 0.3, "variant": "even"}},
            "solver": {"n_schedule": [1, 3, 9], "damping": 0.5, "method": "picard"},
            "verify": {"checks": ["symmetry", {"name": "lemma_dino", "samples": 1000}]},
            "output": {"directory": "here", "formats": ["csv"], "seed": 7},
            "sweep": {"p": [2, 3], "s": [0.2], "gamma": [1], "M": [9, 17]}})",
        R"({"problem": {"p": 1.5, "s": 0.3, "gamma": 0.5,
            "domain": {"shape": "rectangle", "lo": [0, 0], "hi": [2, 1], "M": [9, 5]}, "N": 2,
            "source": {"profile": "power", "alpha": 2, "c": 3}}})",
    };
    for (const std::string& t : texts) {
        const RunConfig c = parse_config(t);
        const RunConfig back = parse_config(to_json(c).dump());
        EXPECT_TRUE(c == back) << t;
        EXPECT_EQ(to_json(c), to_json(back));
    }
}

TEST(Config, StandingAssumptionMessage)
{
    try {
        parse_config(R"({"problem": {"p": 2, "s": 0.9, "gamma": 1}})");
        FAIL() << "expected rejection";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "problem.s");
        EXPECT_NE(std::string(e.what()).find("N>sp violated"), std::string::npos);
    }
}

TEST(Config, FieldDiagnostics)
{
    EXPECT_EQ(field_of(R"({"problem": {"p": 0.5, "s": 0.3}})"), "problem.p");
    EXPECT_EQ(field_of(R"({"problem": {"p": 2, "s": 0.3, "gamma": -1}})"), "problem.gamma");
    EXPECT_EQ(field_of(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1, "bogus": 1}})"), "problem.bogus");
    EXPECT_EQ(field_of(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1}, "solver": {"n_schedule": [4, 2]}})"), "solver.n_schedule");
    EXPECT_EQ(field_of(R"({"problem": {"p": "two"}})"), "problem.p");
    EXPECT_EQ(field_of(R"({"problem": {"domain": {"shape": "ball"}}})").rfind("problem", 0), 0u);
    const std::string syntax = field_of("{\n  \"problem\": {\n    \"p\": 2,,\n  }\n}");
    EXPECT_EQ(syntax.rfind("line 3", 0), 0u) << syntax;
}

TEST(Config, UnknownCheckListsValidNames)
{
    try {
        parse_config(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1}, "verify": {"checks": ["nonsense"]}})");
        FAIL() << "expected rejection";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("nonsense"), std::string::npos);
        for (const std::string& name : known_checks()) EXPECT_NE(msg.find(name), std::string::npos) << name;
    }
}

TEST(Config, CheckParametersValidated)
{
    EXPECT_NO_THROW(parse_config(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1}, "verify": {"checks": [{"name": "lemma_dino", "q": 2, "samples": 10}]}})"));
    EXPECT_THROW(parse_config(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1}, "verify": {"checks": [{"name": "lemma_dino", "depth": 2}]}})"), ConfigError);
}

TEST(Config, CsvSourceLength)
{
    const fs::path dir = scratch("csv");
    const RunConfig base = parse_config(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1, "domain": {"M": 9}}})");
    const Materialized m = materialize(base);
    {
        std::ofstream out(dir / "good.csv");
        out << "# nodal source\n";
        for (std::size_t i : m.domain->interior_indices()) out << format_double(m.domain->node(i)[0]) << ",2.5\n";
    }
    {
        std::ofstream out(dir / "short.csv");
        out << "0,1\n";
    }
    const std::string tmpl = R"({"problem": {"p": 2, "s": 0.3, "gamma": 1, "domain": {"M": 9},
                                 "source": {"profile": "csv", "path": "FILE"}}})";
    auto with = [&](const std::string& file) {
        std::string t = tmpl;
        t.replace(t.find("FILE"), 4, file);
        return t;
    };
    const RunConfig good = parse_config(with("good.csv"), dir);
    const Materialized gm = materialize(good);
    for (std::size_t i : gm.domain->interior_indices()) EXPECT_EQ(gm.problem.f[i], 2.5);
    try {
        parse_config(with("short.csv"), dir);
        FAIL() << "expected rejection";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "problem.source.path");
    }
}

TEST(Config, SourceVariants)
{
    const RunConfig even = parse_config(
        R"({"problem": {"p": 2, "s": 0.3, "gamma": 1, "domain": {"M": 17},
            "source": {"profile": "gaussian", "mu": [0.3], "variant": "even"}}})");
    const Materialized m = materialize(even);
    const auto perm = m.domain->reflect(m.domain->symmetry_axes()[0]);
    for (std::size_t i : m.domain->interior_indices()) EXPECT_NEAR(m.problem.f[i], m.problem.f[perm[i]], 1e-15);

    const RunConfig odd = parse_config(R"({"problem": {"p": 2, "s": 0.3, "gamma": 1, "domain": {"M": 17},
                                            "source": {"variant": "odd"}}})");
    const Materialized o = materialize(odd);
    double asym = 0.0;
    for (std::size_t i : o.domain->interior_indices()) {
        asym = std::max(asym, std::abs(o.problem.f[i] - o.problem.f[perm[i]]));
        EXPECT_GE(o.problem.f[i], 0.0);
    }
    EXPECT_GT(asym, 0.1);
}

TEST(Csv, HeaderAndRows)
{
    auto d = build_interval(-1.0, 1.0, 5, 0.0);
    const Field u = Field::from_function(d, [](const Point& x) { return 0.1 + x[0]; });
    const std::string text = field_csv(u, CsvHeader{2.0, 0.3, 1.0, 64, "5"});
    const std::string expect = "# p=2 s=0.29999999999999999 gamma=1 n_max=64 M=5\n"
                               "-0.5,-0.40000000000000002\n"
                               "0,0.10000000000000001\n"
                               "0.5,0.59999999999999998\n";
    EXPECT_EQ(text, expect);

    const fs::path dir = scratch("csvio");
    write_atomic(dir / "sub" / "u.csv", text);
    EXPECT_FALSE(fs::exists(dir / "sub" / "u.csv.tmp"));
    const auto rows = read_csv_rows(dir / "sub" / "u.csv");
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(rows[r][1], u[d->interior_indices()[r]]);
}

TEST(Csv, BadCellNamesLine)
{
    const fs::path dir = scratch("csvbad");
    std::ofstream(dir / "bad.csv") << "1,2\n3,x\n";
    try {
        read_csv_rows(dir / "bad.csv");
        FAIL() << "expected rejection";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
    }
}
