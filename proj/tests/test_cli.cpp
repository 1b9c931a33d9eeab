#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "rdf2vec/graph.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("rdf2vec_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path file(const std::string& name) const { return dir_ / name; }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(file(name), std::ios::binary) << text;
        return file(name);
    }

    CliResult run(const std::string& args) const {
        auto out = file("stdout.txt"), err = file("stderr.txt");
        std::string cmd = std::string(RDF2VEC_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
        int raw = std::system(cmd.c_str());
        return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
    }

    fs::path dir_;
};

std::set<std::string> lines_of(const std::string& text) {
    std::set<std::string> s;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) s.insert(l);
    return s;
}

// Every walk of exactly `depth` hops (or shorter, ending at a sink) from each entity.
std::set<std::string> enumerate_walks(const rdf2vec::KnowledgeGraph& g, std::size_t depth) {
    std::set<std::string> all;
    std::function<void(rdf2vec::EntityId, std::size_t, std::string)> go = [&](rdf2vec::EntityId at, std::size_t left,
                                                                              std::string prefix) {
        const auto& edges = g.out_edges(at);
        if (left == 0 || edges.empty()) {
            all.insert(prefix);
            return;
        }
        for (const auto& e : edges) go(e.object, left - 1, prefix + " " + g.predicate(e.predicate) + " " + g.entity(e.object));
    };
    for (rdf2vec::EntityId e = 0; e < g.entity_count(); ++e)
        if (!g.out_edges(e).empty()) go(e, depth, g.entity(e));
    return all;
}

}  // namespace

TEST_F(CliTest, HelpListsDefaults) {
    auto walk = run("walk --help");
    EXPECT_EQ(walk.status, 0);
    EXPECT_NE(walk.out.find("--walks"), std::string::npos);
    EXPECT_NE(walk.out.find("500"), std::string::npos);
    EXPECT_NE(walk.out.find("--depth"), std::string::npos);
    auto train = run("train --help");
    EXPECT_EQ(train.status, 0);
    for (const char* flag : {"--mode", "--dim", "--window", "--epochs", "--negatives", "--seed", "--threads"})
        EXPECT_NE(train.out.find(flag), std::string::npos) << flag;
    EXPECT_NE(train.out.find("classic"), std::string::npos);
    EXPECT_EQ(run("eval --help").status, 0);
    EXPECT_EQ(run("nearest --help").status, 0);
}

TEST_F(CliTest, WalkEchoesDefaults) {
    auto g = write("g.nt", rdf2vec::testing::kExampleGraph);
    auto r = run("walk --graph " + g.string() + " -o " + file("w.txt").string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.err.find("walks=500 depth=4"), std::string::npos);
    EXPECT_NE(r.out.find("entities\t4"), std::string::npos);
    EXPECT_NE(r.out.find("walks\t2000"), std::string::npos);
}

TEST_F(CliTest, WalkMissingGraphLeavesNoFile) {
    auto r = run("walk --graph " + file("nope.nt").string() + " -o " + file("w.txt").string());
    EXPECT_NE(r.status, 0);
    EXPECT_FALSE(r.err.empty());
    EXPECT_FALSE(fs::exists(file("w.txt")));
    EXPECT_FALSE(fs::exists(file("w.txt.tmp")));
}

TEST_F(CliTest, WalkMalformedGraphLeavesNoFile) {
    auto g = write("g.nt", "<http://ex/a> <http://ex/p> <http://ex/b>\n");
    auto r = run("walk --graph " + g.string() + " -o " + file("w.txt").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);
    EXPECT_FALSE(fs::exists(file("w.txt")));
}

TEST_F(CliTest, WalkFileCoversAllDepthTwoPaths) {
    auto g = write("g.nt", rdf2vec::testing::kExampleGraph);
    auto r = run("walk --graph " + g.string() + " --depth 2 --walks 100 -o " + file("w.txt").string());
    ASSERT_EQ(r.status, 0) << r.err;
    auto expected = enumerate_walks(rdf2vec::testing::example_graph(), 2);
    EXPECT_EQ(expected.size(), 7u);  // Hamburg 2, Germany 1, Angela_Merkel 2, Peter_Tschentscher 2
    EXPECT_EQ(lines_of(slurp(file("w.txt"))), expected);
}

TEST_F(CliTest, TrainAcceptsPaperParameters) {
    auto g = write("g.nt", rdf2vec::testing::kExampleGraph);
    ASSERT_EQ(run("walk --graph " + g.string() + " --walks 20 -o " + file("w.txt").string()).status, 0);
    auto r = run("train --walks-file " + file("w.txt").string() + " --mode ordered --dim 100 --window 5 --epochs 1 -o " +
                 file("m.txt").string());
    ASSERT_EQ(r.status, 0) << r.err;
    auto model = slurp(file("m.txt"));
    EXPECT_EQ(model.substr(0, model.find('\n')), "8 100");
    EXPECT_NE(r.err.find("1\t"), std::string::npos);  // loss trace on diagnostics
}

TEST_F(CliTest, TrainRejectsZeroDimension) {
    auto r = run("train --walks-file " + file("absent.txt").string() + " --dim 0 -o " + file("m.txt").string());
    EXPECT_NE(r.status, 0);
    EXPECT_FALSE(fs::exists(file("m.txt")));
}

TEST_F(CliTest, TrainIsDeterministic) {
    auto g = write("g.nt", rdf2vec::testing::kExampleGraph);
    ASSERT_EQ(run("walk --graph " + g.string() + " --walks 50 --seed 7 -o " + file("w1.txt").string()).status, 0);
    ASSERT_EQ(run("walk --graph " + g.string() + " --walks 50 --seed 7 -o " + file("w2.txt").string()).status, 0);
    EXPECT_EQ(slurp(file("w1.txt")), slurp(file("w2.txt")));
    for (const char* mode : {"classic", "ordered"}) {
        std::string common = " --mode " + std::string(mode) + " --dim 16 --seed 7 --threads 1 --walks-file " + file("w1.txt").string();
        ASSERT_EQ(run("train" + common + " -o " + file("m1.txt").string()).status, 0);
        ASSERT_EQ(run("train" + common + " -o " + file("m2.txt").string()).status, 0);
        EXPECT_EQ(slurp(file("m1.txt")), slurp(file("m2.txt"))) << mode;
    }
}

TEST_F(CliTest, ConfigFileWithFlagPrecedence) {
    auto g = write("g.nt", rdf2vec::testing::kExampleGraph);
    ASSERT_EQ(run("walk --graph " + g.string() + " --walks 20 -o " + file("w.txt").string()).status, 0);
    auto cfg = write("train.conf", "dim=6\nepochs=1\nmode=ordered\n");
    auto r = run("train --config " + cfg.string() + " --dim 4 --walks-file " + file("w.txt").string() + " -o " + file("m.txt").string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.err.find("mode=ordered dim=4"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("epochs=1"), std::string::npos) << r.err;

    auto bad = write("bad.conf", "# comment\ndimension=6\n");
    r = run("train --config " + bad.string() + " --walks-file " + file("w.txt").string() + " -o " + file("m2.txt").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("dimension"), std::string::npos) << r.err;
    EXPECT_FALSE(std::filesystem::exists(file("m2.txt")));
}

TEST_F(CliTest, EvalOutputs) {
    auto model = write("m.txt",
                       "6 2\n"
                       "x1 1 0\ny1 1 1\nx2 0 1\ny2 -1 1\nz1 -1 0\nz2 -1 -0.1\n");
    auto analogies = write("a.txt", "# header\nx1 y1 x2 y2\nx1 y1 q r\n");
    auto r = run("eval --model " + model.string() + " --task analogy --dataset " + analogies.string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("accuracy\t"), std::string::npos);
    EXPECT_NE(r.out.find("oov\t1"), std::string::npos);

    auto labels = write("l.txt", "x1\tA\ny1\tA\nz1\tB\nz2\tB\n");
    r = run("eval --model " + model.string() + " --task cluster --k 2 --dataset " + labels.string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("acc\t1"), std::string::npos) << r.out;

    r = run("eval --model " + model.string() + " --task classify --k 1 --dataset " + labels.string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("accuracy\t1"), std::string::npos) << r.out;

    auto targets = write("t.txt", "x1\t3\ny1\t3\nz1\t3\n");
    r = run("eval --model " + model.string() + " --task regress --k 1 --dataset " + targets.string());
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("rmse\t0"), std::string::npos) << r.out;

    auto oov = write("o.txt", "nope1\tA\nnope2\tB\n");
    r = run("eval --model " + model.string() + " --task classify --dataset " + oov.string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("no in-vocabulary records"), std::string::npos);

    r = run("eval --model " + model.string() + " --task relatedness --dataset " + labels.string());
    EXPECT_NE(r.status, 0);
    auto bad = write("bad.txt", "a b c\n");
    EXPECT_NE(run("eval --model " + model.string() + " --task analogy --dataset " + bad.string()).status, 0);
}

TEST_F(CliTest, Nearest) {
    auto model = write("m.txt", "4 2\nalpha 1 0\nbeta 1 0.5\ngamma 0 1\ndelta -1 0\n");
    auto r = run("nearest --model " + model.string() + " --k 10 alpha");
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream in(r.out);
    std::vector<std::string> order;
    std::string line;
    while (std::getline(in, line)) order.push_back(line.substr(0, line.find('\t')));
    EXPECT_EQ(order, (std::vector<std::string>{"beta", "gamma", "delta"}));

    r = run("nearest --model " + model.string() + " alpah");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("alpha"), std::string::npos);
}

// On the four-entity example, the order-aware model separates the two people from the country.
TEST_F(CliTest, NearestSeparatesRolesInOrderedModel) {
    auto g = write("g.nt", rdf2vec::testing::kExampleGraph);
    ASSERT_EQ(run("walk --graph " + g.string() + " --walks 500 --depth 4 --seed 1 -o " + file("w.txt").string()).status, 0);
    ASSERT_EQ(run("train --walks-file " + file("w.txt").string() + " --mode ordered --dim 50 --window 5 --seed 1 -o " +
                  file("m.txt").string())
                  .status,
              0);
    auto r = run("nearest --model " + file("m.txt").string() + " --k 10 http://ex/Angela_Merkel");
    ASSERT_EQ(r.status, 0) << r.err;
    auto peter = r.out.find("http://ex/Peter_Tschentscher"), germany = r.out.find("http://ex/Germany");
    ASSERT_NE(peter, std::string::npos);
    ASSERT_NE(germany, std::string::npos);
    EXPECT_LT(peter, germany) << r.out;
}
