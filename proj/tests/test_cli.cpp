#include "bounded_lag/config.hpp"
#include "cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace bounded_lag;

namespace
{

struct Result
{
    int         code;
    std::string out;
    std::string err;
};

Result run(std::vector< std::string > args)
{
    args.insert(args.begin(), "bounded_lag");
    std::ostringstream out, err;
    const int          code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("bounded_lag_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
        unsetenv("BOUNDED_LAG_THREADS");
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text)
    {
        const auto path = (dir_ / name).string();
        std::ofstream(path) << text;
        return path;
    }

    std::string default_config()
    {
        return write("default.json", R"({
  "actions": ["a", "b"],
  "prior": [0.5, 0.5],
  "delta_u": [-2, 5],
  "beta": [0, 0.25, 0.5, 1, 2, 5],
  "n": [4],
  "seed": 7,
  "mc_samples": 0
})");
    }

    static std::string read(const std::string& path)
    {
        std::ifstream      in(path);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    static std::vector< std::vector< std::string > > csv_rows(const std::string& text)
    {
        std::vector< std::vector< std::string > > rows;
        std::istringstream                        in(text);
        std::string                               line;
        while (std::getline(in, line))
        {
            if (line.empty() || line[0] == '#')
                continue;
            std::vector< std::string > cells;
            std::string                cell;
            std::istringstream         ls(line);
            while (std::getline(ls, cell, ','))
                cells.push_back(cell);
            if (!line.empty() && line.back() == ',')
                cells.emplace_back();
            rows.push_back(cells);
        }
        return rows;
    }

    static std::string strip_comments(const std::string& text)
    {
        std::istringstream in(text);
        std::string        line, body;
        while (std::getline(in, line))
            if (line.empty() || line[0] != '#')
                body += line + '\n';
        return body;
    }

    fs::path dir_;
};

} // namespace

TEST(Sha256, knownVector)
{
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, simulateReferenceCell)
{
    const auto r = run({"simulate", default_config(), "--beta", "1", "--n", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 1U + 1U + 4U);
    EXPECT_EQ(rows[0][0], "beta");
    EXPECT_EQ(rows[0].size(), 11U);
    EXPECT_EQ(rows[1][2], "0");
    EXPECT_EQ(rows[1][5], "4.30776428589");
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_EQ(rows[i].size(), 11U);
}

TEST_F(CliTest, simulateBetaZeroHasNoDissipation)
{
    const auto r = run({"simulate", default_config(), "--beta", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_EQ(rows[i][4], "0");
}

TEST_F(CliTest, simulateWritesOutFile)
{
    const auto out = (dir_ / "out.csv").string();
    const auto r   = run({"simulate", default_config(), "--beta", "2", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(csv_rows(read(out)).size(), 6U);
}

TEST_F(CliTest, missingConfigExitsTwoNamingPath)
{
    const auto path = (dir_ / "nope.json").string();
    const auto r    = run({"simulate", path});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(path), std::string::npos);
}

TEST_F(CliTest, parseErrorReportsLine)
{
    const auto r = run({"simulate", write("bad.json", "{\n  \"actions\": [\"a\",\n  oops\n}")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, schemaErrorsNameTheField)
{
    auto r = run({"simulate", write("c1.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,"x"],"beta":[1],"n":[4]})")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("delta_u[1]"), std::string::npos) << r.err;

    r = run({"simulate", write("c2.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,5],"n":[4]})")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("'beta'"), std::string::npos) << r.err;

    r = run({"simulate", write("c3.json", R"({"actions":["a","b"],"prior":[0.7,0.5],"delta_u":[-2,5],"beta":[1],"n":[4]})")});
    EXPECT_EQ(r.code, 2);

    r = run({"simulate", write("c4.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,5],"beta":[1],"n":[0]})")});
    EXPECT_EQ(r.code, 2);

    r = run({"simulate", write("c5.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,5],"beta":[1],"n":[4],"extra":1})")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("extra"), std::string::npos);
}

TEST_F(CliTest, lengthMismatchExitsThree)
{
    const auto r = run({"simulate", write("dim.json", R"({"actions":["a","b","c"],"prior":[0.5,0.5],"delta_u":[-2,5,1],"beta":[1],"n":[4]})")});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("prior"), std::string::npos);
}

TEST_F(CliTest, usageErrorsExitTwo)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"simulate", default_config(), "--n", "0"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, sweepWritesManifestAndIsRepeatable)
{
    const auto cfg = default_config();
    const auto a   = run({"sweep", cfg});
    const auto b   = run({"sweep", cfg});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out.rfind("# config_digest: ", 0), 0U);
    EXPECT_NE(a.out.find("# version: 0.1.0"), std::string::npos);
    EXPECT_NE(a.out.find("# timestamp: "), std::string::npos);
    EXPECT_NE(a.out.find("# command: bounded_lag sweep "), std::string::npos);

    auto drop_timestamp = [](const std::string& s) {
        std::istringstream in(s);
        std::string        line, kept;
        while (std::getline(in, line))
            if (line.rfind("# timestamp:", 0) != 0)
                kept += line + '\n';
        return kept;
    };
    EXPECT_EQ(drop_timestamp(a.out), drop_timestamp(b.out));
    EXPECT_EQ(csv_rows(a.out).size(), 1U + 6U * 5U);
}

TEST_F(CliTest, digestIgnoresFormatting)
{
    const auto a = run({"sweep", write("x.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,5],"beta":[1],"n":[2]})")});
    const auto b = run({"sweep", write("y.json", "{ \"n\": [2],\n \"beta\": [1], \"delta_u\": [-2, 5], \"prior\": [0.5, 0.5], \"actions\": [\"a\", \"b\"] }")});
    auto digest = [](const std::string& s) { return s.substr(0, s.find('\n')); };
    EXPECT_EQ(digest(a.out), digest(b.out));
}

TEST_F(CliTest, singleCellSweepMatchesSimulate)
{
    const auto cfg = write("cell.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,5],"beta":[2],"n":[3],"seed":4,"mc_samples":500})");
    const auto s   = run({"sweep", cfg});
    const auto m   = run({"simulate", cfg});
    ASSERT_EQ(s.code, 0);
    ASSERT_EQ(m.code, 0);
    EXPECT_EQ(strip_comments(s.out), m.out);
}

TEST_F(CliTest, sweepFigure1Blocks)
{
    const auto r = run({"sweep", default_config(), "--figure1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# C: net utility"), std::string::npos);
    const auto f2 = write("f2.json", R"({"actions":["a","b"],"prior":[0.5,0.5],"delta_u":[-2,5],"beta":[1],"n":[1,2]})");
    EXPECT_EQ(run({"sweep", f2, "--figure1"}).code, 2);
}

TEST_F(CliTest, jarzynskiExact)
{
    const auto r = run({"jarzynski", default_config(), "--exact", "--beta", "1", "--n", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("method: exact"), std::string::npos);
    const auto pos = r.out.find("relative_deviation: ");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_LT(std::stod(r.out.substr(pos + 20)), 1e-9);
}

TEST_F(CliTest, jarzynskiMonteCarlo)
{
    const auto r = run({"jarzynski", default_config(), "--samples", "100000", "--seed", "7", "--beta", "1", "--n", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto pos = r.out.find("deviation_in_se: ");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_LE(std::stod(r.out.substr(pos + 17)), 3.0);
}

TEST_F(CliTest, jarzynskiErrors)
{
    EXPECT_EQ(run({"jarzynski", default_config(), "--samples", "1"}).code, 2);
    EXPECT_EQ(run({"jarzynski", default_config()}).code, 2); // mc_samples = 0 in config
    EXPECT_EQ(run({"jarzynski", default_config(), "--exact", "--n", "25"}).code, 4);
}

TEST_F(CliTest, verifyPassesAndFaultFails)
{
    auto r = run({"verify", "--trials", "0"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    r = run({"verify", "--trials", "20", "--seed", "3"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS free_energy_at_optimum"), std::string::npos);

    r = run({"verify", "--trials", "0", "--fault", "perturbed-free-energy"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("verification failed: "), std::string::npos);
    EXPECT_EQ(run({"verify", "--fault", "bogus"}).code, 2);
}

TEST_F(CliTest, threadsEnvironmentVariable)
{
    const auto cfg = default_config();
    setenv("BOUNDED_LAG_THREADS", "1", 1);
    const auto one = run({"simulate", cfg});
    setenv("BOUNDED_LAG_THREADS", "5", 1);
    const auto five = run({"simulate", cfg});
    EXPECT_EQ(one.out, five.out);
    setenv("BOUNDED_LAG_THREADS", "zero", 1);
    EXPECT_EQ(run({"simulate", cfg}).code, 2);
    unsetenv("BOUNDED_LAG_THREADS");
}
