#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wimf/io.hpp"

using namespace wimf;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "wimf_cli_tests";

fs::path fresh(const std::string& name) {
    const fs::path p = kRoot / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Runs the CLI with `args`; stdout and stderr go to `log`.
int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + WIMF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    ADD_FAILURE() << "missing column " << name;
    return 0;
}

}  // namespace

TEST(CliGenerate, WritesDatasetFiles) {
    const fs::path d = fresh("gen");
    ASSERT_EQ(run("generate --kind homogeneous --snr inf --seed 7 --out " + (d / "run1").string(), d / "log"), 0)
        << slurp(d / "log");
    for (const char* f : {"Y.csv", "truth.csv", "meta.cfg"}) EXPECT_TRUE(fs::exists(d / "run1" / f)) << f;
    const MatrixXd Y = read_matrix_csv(d / "run1" / "Y.csv");
    EXPECT_EQ(Y.rows(), 11);
    EXPECT_EQ(Y.cols(), 4000);
    EXPECT_EQ(read_matrix_csv(d / "run1" / "truth.csv").cols(), 6);
    const KeyValues meta = read_key_values(d / "run1" / "meta.cfg");
    EXPECT_EQ(meta.at("kind"), "homogeneous");
    EXPECT_EQ(meta.at("seed"), "7");
    EXPECT_EQ(meta.at("snr"), "inf");
}

TEST(CliGenerate, SegmentedHasEightModes) {
    const fs::path d = fresh("gen_seg");
    ASSERT_EQ(run("generate --kind segmented --out " + d.string(), d / "log"), 0) << slurp(d / "log");
    const MatrixXd T = read_matrix_csv(d / "truth.csv");
    EXPECT_EQ(T.cols(), 8);
    EXPECT_EQ(T.rows(), 200);
}

TEST(CliGenerate, DeterministicBytes) {
    const fs::path d = fresh("gen_det");
    const std::string args = "generate --kind inhomogeneous --snr -3 --seed 11 --out " + (d / "a").string();
    ASSERT_EQ(run(args, d / "log1"), 0);
    const std::string y1 = slurp(d / "a" / "Y.csv"), m1 = slurp(d / "a" / "meta.cfg");
    ASSERT_EQ(run(args, d / "log2"), 0);
    EXPECT_EQ(slurp(d / "a" / "Y.csv"), y1);
    EXPECT_EQ(slurp(d / "a" / "meta.cfg"), m1);
}

TEST(CliGenerate, ConfigFileReproducesRun) {
    const fs::path d = fresh("gen_cfg");
    ASSERT_EQ(run("generate --kind traveling --snr -2 --seed 3 --grid dense --length-t 0.1 --out " +
                      (d / "a").string(),
                  d / "log1"),
              0);
    ASSERT_EQ(run("generate --config " + (d / "a" / "meta.cfg").string() + " --out " + (d / "b").string(),
                  d / "log2"),
              0)
        << slurp(d / "log2");
    EXPECT_EQ(slurp(d / "a" / "Y.csv"), slurp(d / "b" / "Y.csv"));
}

TEST(CliFactorize, TraceAndRecordedHyperparameters) {
    const fs::path d = fresh("fact");
    ASSERT_EQ(run("generate --kind homogeneous --out " + d.string(), d / "log"), 0);
    ASSERT_EQ(run("factorize --in " + d.string() + " --delta 100", d / "log"), 0) << slurp(d / "log");
    const KeyValues cfg = read_key_values(d / "config.cfg");
    const double M = 11.0;
    EXPECT_NEAR(parse_double(cfg.at("gamma")), 100 * M * M / (std::numbers::pi * std::numbers::pi), 1e-9);
    EXPECT_GT(parse_double(cfg.at("lambda")), 0.0);

    const auto rows = read_csv(d / "trace.csv");
    ASSERT_GE(rows.size(), 3u);
    const std::size_t obj = column(rows[0], "objective"), after = column(rows[0], "objective_after");
    double prev = INFINITY;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double o = parse_double(rows[i][obj]), a = parse_double(rows[i][after]);
        EXPECT_LT(o, prev);
        EXPECT_LE(a, o);
        prev = a;
    }
    EXPECT_EQ(read_matrix_csv(d / "D.csv").cols(), 6);
    EXPECT_EQ(read_matrix_csv(d / "X.csv").rows(), 4000);
    EXPECT_EQ(read_matrix_csv(d / "k.csv").rows(), 6);
}

TEST(CliFactorize, ModeCapOnRankDeficientInput) {
    const fs::path d = fresh("fact_cap");
    MatrixXd Y = MatrixXd::Zero(12, 30);
    for (Index j = 0; j < 30; ++j)
        for (Index i = 0; i < 12; ++i) Y(i, j) = std::sin(0.7 * (i + 1)) * std::cos(0.3 * j);
    write_matrix_csv(d / "Y.csv", Y);
    ASSERT_EQ(run("factorize --in " + d.string() + " --max-modes 4 --lambda 0.01", d / "log"), 0) << slurp(d / "log");
    const auto rows = read_csv(d / "trace.csv");
    ASSERT_GE(rows.size(), 2u);
    EXPECT_FALSE(rows.back()[column(rows[0], "polar")].empty());
    EXPECT_LE(read_matrix_csv(d / "D.csv").cols(), 4);
}

TEST(CliEvaluate, TruthAgainstItselfIsZero) {
    const fs::path d = fresh("eval");
    ASSERT_EQ(run("generate --kind segmented --out " + d.string(), d / "log"), 0);
    ASSERT_EQ(run("evaluate --in " + d.string() + " --modes " + (d / "truth.csv").string(), d / "log"), 0)
        << slurp(d / "log");
    const auto rows = read_csv(d / "report.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(parse_double(rows[1][column(rows[0], "mse_e3_mean")]), 0.0);
    EXPECT_EQ(parse_double(rows[1][column(rows[0], "fmse_e3_mean")]), 0.0);
}

TEST(CliEvaluate, HomogeneousPipeline) {
    const fs::path d = fresh("eval_pipe");
    ASSERT_EQ(run("generate --kind homogeneous --out " + d.string(), d / "log"), 0);
    ASSERT_EQ(run("factorize --in " + d.string(), d / "log"), 0);
    ASSERT_EQ(run("evaluate --in " + d.string(), d / "log"), 0) << slurp(d / "log");
    const auto rows = read_csv(d / "report.csv");
    EXPECT_LT(parse_double(rows[1][column(rows[0], "mse_e3_mean")]), 1.0);
}

TEST(CliEvaluate, ShapeMismatchIsADataError) {
    const fs::path d = fresh("eval_bad");
    write_matrix_csv(d / "truth.csv", MatrixXd::Ones(5, 2));
    write_matrix_csv(d / "D.csv", MatrixXd::Ones(4, 2));
    EXPECT_EQ(run("evaluate --in " + d.string(), d / "log"), 2);
}

TEST(CliFilterResponse, PeakAndNarrowing) {
    const fs::path d = fresh("filter");
    auto half_width = [&](double g) {
        const fs::path f = d / ("g" + std::to_string(static_cast<int>(g)) + ".csv");
        EXPECT_EQ(run("filter-response --k-bar 2.5 --gamma " + std::to_string(g) + " --out " + f.string(), d / "log"),
                  0);
        const auto rows = read_csv(f);
        // The largest coefficient sits on the eigenvalue nearest -k_bar and
        // falls short of 1 only by that eigenvalue's offset.
        double nearest = INFINITY, at_nearest = 0.0, top = 0.0;
        int above = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double lam = parse_double(rows[i][0]), c = parse_double(rows[i][1]);
            if (std::abs(lam + 2.5) < nearest) {
                nearest = std::abs(lam + 2.5);
                at_nearest = c;
            }
            top = std::max(top, c);
            if (c >= 0.5) ++above;
        }
        EXPECT_EQ(at_nearest, top);
        EXPECT_NEAR(at_nearest, 1.0 / std::sqrt(1.0 + g * nearest * nearest), 1e-12);
        return above;
    };
    EXPECT_LT(half_width(10000), half_width(1000));
    ASSERT_EQ(run("filter-response --gamma 0 --n 16 --out " + (d / "flat.csv").string(), d / "log"), 0);
    const auto rows = read_csv(d / "flat.csv");
    ASSERT_EQ(rows.size(), 17u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(parse_double(rows[i][1]), 1.0);
    EXPECT_TRUE(fs::exists(d / "flat.cfg"));
}

TEST(CliBenchmark, OneRowWithBothMethods) {
    const fs::path d = fresh("bench");
    ASSERT_EQ(run("benchmark --kind homogeneous --snr inf --trials 5 --out " + d.string(), d / "log"), 0)
        << slurp(d / "log");
    const auto rows = read_csv(d / "benchmark.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][0], "homogeneous");
    EXPECT_EQ(rows[1][column(rows[0], "trials")], "5");
    EXPECT_LT(parse_double(rows[1][column(rows[0], "wimf_mse_e3_mean")]), 1.0);
    EXPECT_GE(parse_double(rows[1][column(rows[0], "pca_mse_e3_mean")]), 0.0);
    EXPECT_EQ(read_csv(d / "trials.csv").size(), 6u);
    EXPECT_TRUE(fs::exists(d / "report_wimf.csv"));
    EXPECT_TRUE(fs::exists(d / "report_pca.csv"));
    EXPECT_TRUE(fs::exists(d / "config.cfg"));
}

TEST(CliExitCodes, UsageDataAndNumerical) {
    const fs::path d = fresh("exit");
    EXPECT_EQ(run("generate --kind spiral --out " + d.string(), d / "log"), 1);
    EXPECT_EQ(run("generate", d / "log"), 1);
    EXPECT_EQ(run("frobnicate", d / "log"), 1);
    EXPECT_EQ(run("factorize --in " + (d / "missing").string(), d / "log"), 2);
    EXPECT_EQ(run("generate --kind homogeneous --out /proc/wimf_forbidden", d / "log"), 2);

    MatrixXd nanY = MatrixXd::Ones(4, 4);
    nanY(1, 2) = NAN;
    write_matrix_csv(d / "nan" / "Y.csv", nanY);
    EXPECT_EQ(run("factorize --in " + (d / "nan").string() + " --max-modes 2", d / "log"), 2);

    MatrixXd big(5, 6);
    for (Index j = 0; j < 6; ++j)
        for (Index i = 0; i < 5; ++i) big(i, j) = 1e200 * std::sin(1.0 + i * 6 + j);
    write_matrix_csv(d / "big" / "Y.csv", big);
    EXPECT_EQ(run("factorize --in " + (d / "big").string() + " --max-modes 3", d / "log"), 3);
    EXPECT_TRUE(fs::exists(d / "big" / "trace.csv"));  // partial trace kept
    EXPECT_GE(read_csv(d / "big" / "trace.csv").size(), 2u);
}

TEST(CliEnvironment, OutputDirectoryOverride) {
    const fs::path d = fresh("env");
    const std::string cmd = "WIMF_OUT=\"" + (d / "viaenv").string() + "\" \"" + WIMF_CLI_PATH +
                            "\" generate --kind homogeneous --length-t 0.01 > \"" + (d / "log").string() + "\" 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(d / "viaenv" / "Y.csv"));
}
