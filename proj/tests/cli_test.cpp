#include "crowdtrack/cli.hpp"
#include "crowdtrack/config.hpp"
#include "crowdtrack/error.hpp"
#include "crowdtrack/mot_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace crowdtrack {
namespace {

namespace fs = std::filesystem;

struct Run {
    int status = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    Run r;
    r.status = run_command(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("crowdtrack_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text)
    {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir_;
};

TEST_F(CliTest, EvalIdenticalFilesIsPerfect)
{
    const auto gt = write("gt.txt", "1,1,0,0,10,20,1,-1,-1,-1\n2,1,1,0,10,20,1,-1,-1,-1\n2,2,50,0,10,20,1,-1,-1,-1\n");
    const auto r = run({"eval", "--gt", gt, "--result", gt});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("mota=1.000000\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("idsw=0\n"), std::string::npos);
    EXPECT_NE(r.out.find("name,mota,idf1,fp,fn,idsw,num_gt,num_pred\n"), std::string::npos);
}

TEST_F(CliTest, EvalWithDetectionsReportsAp)
{
    const auto gt = write("gt.txt", "1,1,0,0,10,20,1,-1,-1,-1\n");
    const auto det = write("det.txt", "1,-1,0,0,10,20,0.9,-1,-1,-1\n");
    const auto r = run({"eval", "--gt", gt, "--result", gt, "--detections", det});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("ap=1.000000\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, TrackStationaryBoxGivesOneId)
{
    const auto det = write("det.txt", "1,-1,10,10,40,100,0.9,-1,-1,-1\n"
                                      "2,-1,10,10,40,100,0.9,-1,-1,-1\n"
                                      "3,-1,10,10,40,100,0.9,-1,-1,-1\n");
    const auto res = (dir_ / "res.txt").string();
    const auto r = run({"track", "--det", det, "-o", res});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto frames = parse_mot_file(res);
    std::set<int> ids;
    std::size_t rows = 0;
    for (const auto& [f, rs] : frames) {
        for (const auto& row : rs) {
            ids.insert(row.id);
            ++rows;
        }
    }
    EXPECT_EQ(rows, 3u);
    EXPECT_EQ(ids, (std::set<int>{1}));
}

TEST_F(CliTest, TrackNeedsAnInput)
{
    EXPECT_NE(run({"track"}).status, 0);
}

TEST_F(CliTest, MissingFileFails)
{
    const auto r = run({"eval", "--gt", (dir_ / "absent.txt").string(), "--result", (dir_ / "absent.txt").string()});
    EXPECT_NE(r.status, 0);
}

TEST_F(CliTest, MalformedInputNamesLine)
{
    const auto gt = write("gt.txt", "1,1,0,0,10,20,1\n1,2,0,x,10,20,1\n");
    const auto r = run({"eval", "--gt", gt, "--result", gt});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("gt.txt:2:"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownConfigKeyIsNamed)
{
    const auto cfg = write("run.cfg", "# comment\ntracker.max_lost_frames = 10\ntracker.bogus = 3\n");
    const auto r = run({"bench", "--seed", "1", "--config", cfg});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("tracker.bogus"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
}

TEST_F(CliTest, OutOfRangeConfigValueFails)
{
    const auto cfg = write("run.cfg", "fusion.match_iou_gate = 1.5\n");
    const auto r = run({"config", "--config", cfg});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("match_iou_gate"), std::string::npos) << r.err;
}

TEST_F(CliTest, BenchIsByteIdenticalAcrossRuns)
{
    const auto cfg = write("small.cfg", "scene.num_agents = 10\nscene.num_frames = 60\n");
    const auto a = run({"bench", "--seed", "7", "--config", cfg});
    const auto b = run({"bench", "--seed", "7", "--config", cfg});
    ASSERT_EQ(a.status, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out.find("fused.mota="), std::string::npos);
    EXPECT_NE(a.out.find("body_only.mota="), std::string::npos);
    EXPECT_NE(run({"bench", "--seed", "8", "--config", cfg}).out, a.out);
}

TEST_F(CliTest, RandomizedCommandsRequireSeed)
{
    EXPECT_NE(run({"bench"}).status, 0);
    EXPECT_NE(run({"simulate", "--out-dir", dir_.string()}).status, 0);
}

TEST_F(CliTest, SimulateWritesAllFilesDeterministically)
{
    const auto cfg = write("small.cfg", "scene.num_agents = 5\nscene.num_frames = 20\n");
    const auto a = dir_ / "a", b = dir_ / "b";
    ASSERT_EQ(run({"simulate", "--seed", "4", "--out-dir", a.string(), "--config", cfg}).status, 0);
    ASSERT_EQ(run({"simulate", "--seed", "4", "--out-dir", b.string(), "--config", cfg}).status, 0);
    for (const char* name : {"gt.txt", "gt_body.txt", "det_joint.txt", "det_body.txt"}) {
        ASSERT_TRUE(fs::exists(a / name)) << name;
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
    EXPECT_EQ(parse_merged_gt_file(a / "gt.txt").size(), 100u);
}

TEST_F(CliTest, FuseThenTrackThenEvalOnSimulation)
{
    const auto cfg = write("small.cfg", "scene.num_agents = 8\nscene.num_frames = 50\n");
    const auto sim = dir_ / "sim";
    ASSERT_EQ(run({"simulate", "--seed", "2", "--out-dir", sim.string(), "--config", cfg}).status, 0);
    const auto fused = (dir_ / "fused.txt").string(), res = (dir_ / "res.txt").string();
    ASSERT_EQ(run({"fuse", "--joint", (sim / "det_joint.txt").string(), "--body", (sim / "det_body.txt").string(),
                   "-o", fused, "--config", cfg})
                  .status,
              0);
    ASSERT_EQ(run({"track", "--det", fused, "-o", res, "--config", cfg}).status, 0);
    const auto e = run({"eval", "--gt", (sim / "gt.txt").string(), "--gt-format", "merged", "--result", res});
    ASSERT_EQ(e.status, 0) << e.err;
    EXPECT_NE(e.out.find("mota="), std::string::npos);

    // Fusing in a separate step gives the same tracks as fusing inside track.
    const auto res2 = (dir_ / "res2.txt").string();
    ASSERT_EQ(run({"track", "--joint", (sim / "det_joint.txt").string(), "--body", (sim / "det_body.txt").string(),
                   "-o", res2, "--config", cfg})
                  .status,
              0);
    EXPECT_EQ(slurp(res), slurp(res2));
}

TEST_F(CliTest, MergeLabelsAppliesOffset)
{
    const auto heads = write("heads.txt", "1,11,8,5,10,10,1\n1,12,500,5,10,10,1\n");
    const auto bodies = write("bodies.txt", "1,1,0,0,30,90,1\n");
    const auto r = run({"merge-labels", "--heads", heads, "--bodies", bodies, "--offset", "2,-3"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "1,1,10.00,2.00,10.00,10.00,0.00,0.00,30.00,90.00\n"
                     "1,12,502.00,2.00,10.00,10.00,-1,-1,-1,-1\n");
    EXPECT_NE(run({"merge-labels", "--heads", heads, "--bodies", bodies, "--offset", "2"}).status, 0);
}

TEST_F(CliTest, AssignDemoDumpsCandidates)
{
    const auto pairs = write("pairs.txt", "1,3,40,40,12,14,30,40,32,90\n1,4,120,60,12,14,110,60,32,90\n");
    const auto dump = (dir_ / "dump.txt").string();
    const auto r = run({"assign-demo", "--gt-pairs", pairs, "--grid", "24,16,8", "--seed", "1", "-o", dump});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto text = slurp(dump);
    EXPECT_EQ(text.rfind("grid_index,gt_id,cost,positive\n", 0), 0u);
    EXPECT_NE(text.find(",3,"), std::string::npos);
    EXPECT_NE(text.find(",4,"), std::string::npos);
    EXPECT_NE(text.find(",1\n"), std::string::npos);
    EXPECT_NE(r.out.find("loss.total="), std::string::npos);
    EXPECT_EQ(run({"assign-demo", "--gt-pairs", pairs, "--grid", "24,16,8", "--seed", "1", "-o", dump + "2"}).status, 0);
    EXPECT_EQ(slurp(dump), slurp(dump + "2"));
    EXPECT_NE(run({"assign-demo", "--gt-pairs", pairs, "--grid", "24,x,8", "--seed", "1"}).status, 0);
}

TEST_F(CliTest, ConfigPrintsEveryKey)
{
    const auto r = run({"config"});
    ASSERT_EQ(r.status, 0);
    for (const auto& key : RunConfig::keys()) {
        EXPECT_NE(r.out.find(key + " = "), std::string::npos) << key;
    }
    EXPECT_NE(r.out.find("fusion.high_score_threshold = 0.6\n"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandFails)
{
    EXPECT_NE(run({"frobnicate"}).status, 0);
}

TEST(RunConfig, TextRoundTrip)
{
    RunConfig cfg;
    cfg.set("tracker.max_lost_frames", "12");
    cfg.set("simota.lambda2", "0.25");
    cfg.set("loss.use_l1", "true");
    cfg.validate();
    RunConfig back;
    std::istringstream in(cfg.to_text());
    back.apply(in);
    EXPECT_EQ(back.to_text(), cfg.to_text());
    EXPECT_EQ(back.tracker.max_lost_frames, 12);
    EXPECT_EQ(back.simota.lambda2, 0.25);
    EXPECT_TRUE(back.loss_use_l1);
}

TEST(RunConfig, BadValuesAreRejected)
{
    RunConfig cfg;
    EXPECT_THROW(cfg.set("tracker.max_lost_frames", "2.5"), InputError);
    EXPECT_THROW(cfg.set("simota.lambda1", "abc"), InputError);
    EXPECT_THROW(cfg.set("loss.use_l1", "maybe"), InputError);
    EXPECT_THROW(cfg.set("nope", "1"), InputError);
    std::istringstream in("scene.num_frames 3\n");
    EXPECT_THROW(cfg.apply(in, "x.cfg"), InputError);
}

} // namespace
} // namespace crowdtrack
