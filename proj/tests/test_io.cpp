#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wimf/errors.hpp"
#include "wimf/io.hpp"

using namespace wimf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "wimf_io_tests" / name;
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
    std::mt19937_64 rng(50);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(parse_double(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    for (double x : {std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(), -0.0})
        EXPECT_EQ(parse_double(format_double(x)), x);
}

TEST(FormatDouble, NonFiniteValues) {
    EXPECT_EQ(format_double(INFINITY), "inf");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
    EXPECT_EQ(format_double(NAN), "nan");
    EXPECT_EQ(parse_double("inf"), INFINITY);
    EXPECT_EQ(parse_double(" -inf "), -INFINITY);
    EXPECT_TRUE(std::isnan(parse_double("nan")));
    EXPECT_THROW(parse_double("1.5x"), DataError);
    EXPECT_THROW(parse_double(""), DataError);
}

TEST(MatrixCsv, BitExactRoundTrip) {
    std::mt19937_64 rng(51);
    const MatrixXd M = oracle::random_matrix(17, 9, rng) * 1e-3;
    const fs::path p = scratch("roundtrip") / "nested" / "M.csv";
    write_matrix_csv(p, M);
    const MatrixXd R = read_matrix_csv(p);
    ASSERT_EQ(R.rows(), 17);
    ASSERT_EQ(R.cols(), 9);
    EXPECT_EQ(R, M);
}

TEST(MatrixCsv, MalformedInputRejected) {
    const fs::path dir = scratch("errors");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "ragged.csv") << "1,2,3\n4,5\n";
        std::ofstream(dir / "junk.csv") << "1,abc\n";
    }
    EXPECT_THROW(read_matrix_csv(dir / "ragged.csv"), DataError);
    EXPECT_THROW(read_matrix_csv(dir / "junk.csv"), DataError);
    EXPECT_THROW(read_matrix_csv(dir / "missing.csv"), DataError);
}

TEST(KeyValues, RoundTripSortedWithComments) {
    const fs::path p = scratch("kv") / "meta.cfg";
    const KeyValues kv{{"snr", "-11.84"}, {"kind", "homogeneous"}, {"k", "3.14,6.28"}};
    write_key_values(p, kv);
    EXPECT_EQ(read_key_values(p), kv);
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "k = 3.14,6.28");

    const fs::path q = p.parent_path() / "hand.cfg";
    std::ofstream(q) << "# comment\n\n  seed =  7 \nbad line\n";
    EXPECT_THROW(read_key_values(q), DataError);
    std::ofstream(q) << "# comment\n\n  seed =  7 \n";
    EXPECT_EQ(read_key_values(q).at("seed"), "7");
}

TEST(DoubleLists, JoinAndSplit) {
    VectorXd v(3);
    v << 0.1, -2.5, 1e-300;
    EXPECT_EQ(split_doubles(join_doubles(v)), v);
    EXPECT_EQ(join_doubles(v, ';'), "0.1;-2.5;1e-300");
    EXPECT_EQ(split_doubles("").size(), 0);
}
