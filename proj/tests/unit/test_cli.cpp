#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fsl/cli.hpp"
#include "fsl/io/report.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("fsl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "fsl");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return fsl::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    void make_data(const std::string& name, const std::string& separation = "6") {
        ASSERT_EQ(run({"gen-synth", "--seed", "1", "--counts", "130", "--separation", separation, "--out", path(name)}),
                  0)
            << err_.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, PipelineTrainEvalEnsemble) {
    make_data("d.json");
    std::vector<std::string> preds;
    for (int seed = 1; seed <= 3; ++seed) {
        const std::string ck = path("m" + std::to_string(seed) + ".fsck");
        ASSERT_EQ(run({"train", "--data", path("d.json"), "--seed", std::to_string(seed), "--epochs", "2",
                       "--episodes-per-epoch", "4", "--hidden", "16", "--embedding-dim", "16", "--out", ck}),
                  0)
            << err_.str();
        EXPECT_TRUE(fs::exists(ck));
        const std::string p = path("p" + std::to_string(seed) + ".json");
        ASSERT_EQ(run({"eval", "--model", ck, "--seed", "7", "--episodes", "5", "--out", p}), 0) << err_.str();
        preds.push_back(p);
    }
    std::vector<std::string> args{"ensemble", "--out", path("ens.json"), "--inputs"};
    args.insert(args.end(), preds.begin(), preds.end());
    ASSERT_EQ(run(args), 0) << err_.str();
    const fsl::io::RunReport r = fsl::io::read_report(path("ens.json"));
    ASSERT_TRUE(r.ensemble.has_value());
    EXPECT_EQ(r.models.size(), 3u);
    EXPECT_EQ(r.ensemble->decisions.size(), 5u * 4 * 15);
}

TEST_F(Cli, SingleInputEnsembleEqualsEval) {
    make_data("d.json");
    ASSERT_EQ(run({"train", "--data", path("d.json"), "--seed", "3", "--epochs", "1", "--episodes-per-epoch", "2",
                   "--out", path("m.fsck")}),
              0)
        << err_.str();
    ASSERT_EQ(run({"eval", "--model", path("m.fsck"), "--seed", "2", "--episodes", "4", "--out", path("p.json"),
                   "--report", path("eval.json")}),
              0)
        << err_.str();
    ASSERT_EQ(run({"ensemble", "--inputs", path("p.json"), "--out", path("ens.json")}), 0) << err_.str();
    const auto eval = fsl::io::read_report(path("eval.json"));
    const auto ens = fsl::io::read_report(path("ens.json"));
    EXPECT_EQ(ens.ensemble->hard, *eval.models[0].metrics);
    EXPECT_EQ(ens.ensemble->soft, *eval.models[0].metrics);

    // checkpoint input evaluated on the same episodes gives the same result
    ASSERT_EQ(run({"ensemble", "--inputs", path("m.fsck"), "--seed", "2", "--episodes", "4", "--out",
                   path("ens2.json")}),
              0)
        << err_.str();
    EXPECT_EQ(fsl::io::read_report(path("ens2.json")).ensemble->soft, *eval.models[0].metrics);
}

TEST_F(Cli, TrainRequiresSeed) {
    make_data("d.json");
    EXPECT_NE(run({"train", "--data", path("d.json"), "--out", path("m.fsck")}), 0);
    EXPECT_NE(err_.str().find("seed"), std::string::npos);
    std::ofstream(path("c.json")) << R"({"train": {"seed": 4, "epochs": 1, "episodes_per_epoch": 2}})";
    EXPECT_EQ(run({"train", "--config", path("c.json"), "--data", path("d.json"), "--out", path("m.fsck")}), 0)
        << err_.str();
}

TEST_F(Cli, FlagsOverrideConfigAndAreEchoed) {
    make_data("d.json");
    std::ofstream(path("c.json")) << R"({"train": {"seed": 4, "epochs": 1, "episodes_per_epoch": 2, "margin": 0.9}})";
    ASSERT_EQ(run({"train", "--config", path("c.json"), "--data", path("d.json"), "--margin", "0.2", "--no-cal",
                   "--out", path("m.fsck"), "--report", path("r.json")}),
              0)
        << err_.str();
    const auto r = fsl::io::read_report(path("r.json"));
    EXPECT_EQ(r.config.train.margin, 0.2);
    EXPECT_FALSE(r.config.train.use_cal);
    EXPECT_EQ(r.config.train.seed, 4u);
    EXPECT_EQ(r.config.train.epochs, 1u);
}

TEST_F(Cli, SameSeedSameReport) {
    make_data("d.json");
    for (const char* name : {"a", "b"}) {
        ASSERT_EQ(run({"train", "--data", path("d.json"), "--seed", "9", "--epochs", "1", "--episodes-per-epoch", "3",
                       "--out", path(std::string(name) + ".fsck")}),
                  0);
        ASSERT_EQ(run({"eval", "--model", path(std::string(name) + ".fsck"), "--episodes", "3", "--out",
                       path(std::string(name) + ".json"), "--report", path(std::string(name) + "_r.json")}),
                  0);
    }
    EXPECT_EQ(fsl::io::read_report(path("a_r.json")).models[0].metrics,
              fsl::io::read_report(path("b_r.json")).models[0].metrics);
}

TEST_F(Cli, MissingCheckpointNamesPath) {
    const std::string missing = path("nowhere.fsck");
    EXPECT_NE(run({"eval", "--model", missing, "--data", path("d.json")}), 0);
    EXPECT_NE(err_.str().find(missing), std::string::npos) << err_.str();
}

TEST_F(Cli, UnknownCommandAndFlag) {
    EXPECT_NE(run({"frobnicate"}), 0);
    EXPECT_NE(run({"train", "--bogus-flag"}), 0);
    EXPECT_NE(run({}), 0);
}

TEST_F(Cli, Ablate) {
    make_data("d.json", "2");
    ASSERT_EQ(run({"ablate", "--data", path("d.json"), "--seed", "1", "--seeds", "2", "--epochs", "1",
                   "--episodes-per-epoch", "2", "--episodes", "3", "--hidden", "8", "--embedding-dim", "8", "--out",
                   path("abl.json")}),
              0)
        << err_.str();
    const auto r = fsl::io::read_report(path("abl.json"));
    ASSERT_TRUE(r.ablation.has_value());
    EXPECT_EQ(r.ablation->pairs.size(), 2u);
    EXPECT_TRUE(r.ablation->pairs[0].with_cal.metrics.has_value());
    EXPECT_TRUE(r.ablation->pairs[0].without_cal.compactness.has_value());
}
