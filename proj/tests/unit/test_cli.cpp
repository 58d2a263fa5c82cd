#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qrng_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Runs the tool; stdout and stderr land in out.txt / err.txt.
    int run(const std::string& args) {
        const std::string cmd = std::string(QRNG_CLI_PATH) + " " + args + " >" + (dir_ / "out.txt").string() + " 2>" +
                                (dir_ / "err.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }
    std::string out() const { return slurp(dir_ / "out.txt"); }
    std::string err() const { return slurp(dir_ / "err.txt"); }
    nlohmann::json out_json() const { return nlohmann::json::parse(out()); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("bogus"), 2);
    EXPECT_EQ(run("simulate --preset nokia-n9 --nbar 410 --frames 0 --out " + path("f")), 2);
    EXPECT_EQ(run("simulate --preset no-such-camera --nbar 410"), 2);
    EXPECT_EQ(run("entropy --nbar -1"), 2);
    EXPECT_EQ(run("plan --s 0.64"), 0);
    EXPECT_EQ(run("plan --s 0.64 --nbar 410"), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, SimulateIsDeterministic) {
    ASSERT_EQ(run("--seed 42 simulate --preset nokia-n9 --nbar 410 --frames 3 --width 32 --height 16 --out " + path("a")), 0);
    ASSERT_EQ(run("simulate --preset nokia-n9 --nbar 410 --frames 3 --width 32 --height 16 --seed 42 --out " + path("b")), 0);
    for (const char* f : {"frame_0000.pgm", "frame_0001.pgm", "frame_0002.pgm"}) {
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
    ASSERT_EQ(run("simulate --preset nokia-n9 --nbar 410 --frames 1 --width 32 --height 16 --seed 43 --out " + path("c")), 0);
    EXPECT_NE(slurp(dir_ / "a" / "frame_0000.pgm"), slurp(dir_ / "c" / "frame_0000.pgm"));
}

TEST_F(Cli, SimulateSummaryJson) {
    ASSERT_EQ(run("--json simulate --preset nokia-n9 --nbar 410 --frames 4 --width 64 --height 64 --out " + path("f")), 0);
    const auto j = out_json();
    const auto& level = j.at("levels").at(0);
    EXPECT_NEAR(level.at("mean_code").get<double>(), 1.9 * (410 - 6), 5.0);
    EXPECT_NEAR(level.at("fano_predicted").get<double>(), 1.0 + 3.3 * 3.3 / 410.0, 1e-12);
    EXPECT_TRUE(level.at("temporal_variance").is_number());
}

TEST_F(Cli, CharacterizeSweepRecoversGain) {
    ASSERT_EQ(run("--seed 3 simulate --preset atik383l --nbar 1000 3000 5000 8000 10000 --frames 10 --width 50 "
                  "--height 50 --format raw16le --out " + path("sweep")),
              0);
    ASSERT_EQ(run("--json characterize --input " + path("sweep") + " --out " + path("ch")), 0);
    const auto j = out_json();
    EXPECT_NEAR(j.at("photon_transfer").at("fitted_zeta").get<double>(), 2.3, 0.07);
    EXPECT_TRUE(fs::exists(dir_ / "ch" / "mask.pgm"));
    EXPECT_TRUE(fs::exists(dir_ / "ch" / "fano.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "ch" / "characterization.json"));
}

TEST_F(Cli, CharacterizeIdenticalFramesReportsFanoError) {
    ASSERT_EQ(run("simulate --preset nokia-n9 --nbar 200 --frames 1 --width 16 --height 16 --out " + path("one")), 0);
    fs::create_directories(dir_ / "same");
    fs::copy_file(dir_ / "one" / "frame_0000.pgm", dir_ / "same" / "a.pgm");
    fs::copy_file(dir_ / "one" / "frame_0000.pgm", dir_ / "same" / "b.pgm");
    EXPECT_EQ(run("characterize --preset nokia-n9 --input " + path("same") + " --out " + path("ch")), 1);
    EXPECT_NE(err().find("zero temporal variance"), std::string::npos) << err();
}

TEST_F(Cli, EntropyAndPlanJson) {
    ASSERT_EQ(run("--json entropy --nbar 410 --preset nokia-n9"), 0);
    EXPECT_NEAR(out_json().at("s").get<double>(), 0.6387, 1e-4);
    ASSERT_EQ(run("--json plan --s 0.64 --target-log2-eps -390 --l 2000"), 0);
    const auto plan = out_json();
    EXPECT_EQ(plan.at("k"), 500);
    EXPECT_EQ(plan.at("log2_epsilon_exact"), "-390");
    EXPECT_EQ(run("plan --s 0.1 --target-log2-eps -390 --l 2000"), 2);
}

TEST_F(Cli, ExtractCompressesFourToOneAndIsReproducible) {
    ASSERT_EQ(run("simulate --preset nokia-n9 --nbar 410 --frames 48 --width 100 --height 50 --out " + path("f")), 0);
    ASSERT_EQ(run("--json extract --input " + path("f") + " --out " + path("a.bin")), 0);
    const auto j = out_json();
    EXPECT_EQ(j.at("raw_bits"), 48 * 100 * 50 * 10);
    EXPECT_EQ(j.at("output_bits").get<std::size_t>() * 4, j.at("raw_bits").get<std::size_t>());
    EXPECT_LT(j.at("log2_epsilon").get<double>(), -300.0);
    ASSERT_EQ(run("extract --input " + path("f") + " --out " + path("b.bin")), 0);
    EXPECT_EQ(slurp(dir_ / "a.bin"), slurp(dir_ / "b.bin"));
    EXPECT_EQ(slurp(dir_ / "a.bin").size(), 48u * 100 * 50 * 10 / 4 / 8);

    ASSERT_EQ(run("extract --input " + path("f") + " --out " + path("c.bin") +
                  " --matrix-seed 0000000000000000000000000000000000000000000000000000000000000001"),
              0);
    EXPECT_NE(slurp(dir_ / "a.bin"), slurp(dir_ / "c.bin"));
}

TEST_F(Cli, ExtractRefusesWithoutSecurityMargin) {
    ASSERT_EQ(run("simulate --preset nokia-n9 --nbar 410 --frames 2 --width 40 --height 40 --out " + path("f")), 0);
    EXPECT_EQ(run("extract --input " + path("f") + " --s 0.2 --out " + path("x.bin")), 2);
    EXPECT_NE(err().find("security margin"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "x.bin"));
    EXPECT_EQ(run("extract --input " + path("f") + " --s 0.2 --force --out " + path("x.bin")), 0);
    EXPECT_TRUE(fs::exists(dir_ / "x.bin"));
    EXPECT_EQ(run("extract --input " + path("f") + " --l 500 --k 500 --out " + path("y.bin")), 2);
}

TEST_F(Cli, TestCommandAndExport) {
    ASSERT_EQ(run("simulate --preset nokia-n9 --nbar 410 --frames 8 --width 200 --height 100 --out " + path("f")), 0);
    ASSERT_EQ(run("extract --input " + path("f") + " --out " + path("bits.bin")), 0);
    ASSERT_EQ(run("--json test --input " + path("bits.bin") + " --export " + path("copy.bin")), 0);
    const auto report = out_json();
    EXPECT_EQ(report.at("tests").size(), 4u);
    EXPECT_EQ(report.at("bits_tested"), 8 * 200 * 100 * 10 / 4);
    EXPECT_EQ(slurp(dir_ / "copy.bin"), slurp(dir_ / "bits.bin"));
    ASSERT_EQ(run("test --input " + path("bits.bin") + " --export -"), 0);
    EXPECT_EQ(out(), slurp(dir_ / "bits.bin"));
    EXPECT_EQ(run("test --input " + path("missing.bin")), 2);
}

TEST_F(Cli, MissingInputIsRuntimeFailure) {
    EXPECT_EQ(run("extract --input " + path("nowhere")), 1);
}
