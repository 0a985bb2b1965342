#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr together
};

Outcome cgrsim(const std::string& args) {
  const std::string cmd = std::string("\"") + CGRSIM_PATH + "\" " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return o;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p) != nullptr) o.output += buf.data();
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cgrsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

constexpr const char* kChain =
    "node A sat\nnode B sat\nnode C sat\nnode D sat\nnode E sat\n"
    "contact 1 A B 0 20000 400\ncontact 2 B C 10000 30000 400\n"
    "contact 3 C D 8000 40000 400\ncontact 4 D E 15000 50000 400\n";

constexpr const char* kSmall = "--sats 8 --planes 4 --hours 2";

}  // namespace

TEST_F(Cli, MissingScenarioIsUsageError) {
  const auto o = cgrsim("run --algo proposed");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("--plan"), std::string::npos);
  EXPECT_NE(o.output.find("--generate"), std::string::npos);
}

TEST_F(Cli, BadValuesAreRejected) {
  EXPECT_EQ(cgrsim("gen-scenario --sats 5 --planes 4 -o " + path("x.cp")).code, 2);
  EXPECT_FALSE(fs::exists(path("x.cp")));
  write("t1.cp", kChain);
  EXPECT_EQ(cgrsim("run --plan " + path("t1.cp") + " --source A --dest E --rate fast").code, 2);
  EXPECT_EQ(cgrsim("run --plan " + path("t1.cp") + " --source A --dest E --algo flooding").code, 2);
  EXPECT_NE(cgrsim("cp-stats " + path("missing.cp")).code, 0);
}

TEST_F(Cli, GeneratedPlanIsReproducible) {
  ASSERT_EQ(cgrsim(std::string("gen-scenario ") + kSmall + " -o " + path("a.cp")).code, 0);
  ASSERT_EQ(cgrsim(std::string("gen-scenario ") + kSmall + " -o " + path("b.cp")).code, 0);
  const auto a = slurp(path("a.cp"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.cp")));
}

TEST_F(Cli, CpStats) {
  write("t1.cp", kChain);
  const auto o = cgrsim("cp-stats " + path("t1.cp"));
  ASSERT_EQ(o.code, 0);
  // durations 20, 20, 32 and 35 s
  EXPECT_NE(o.output.find("contacts 4\n"), std::string::npos);
  EXPECT_NE(o.output.find("mean_duration_s 26.75\n"), std::string::npos);
  write("empty.cp", "");
  const auto e = cgrsim("cp-stats " + path("empty.cp"));
  ASSERT_EQ(e.code, 0);
  EXPECT_NE(e.output.find("contacts 0\n"), std::string::npos);
}

TEST_F(Cli, RunWritesOutputs) {
  write("t1.cp", kChain);
  const auto o = cgrsim("run --plan " + path("t1.cp") + " --source A --dest E --algo proposed --nb 1 --out " +
                        path("out"));
  ASSERT_EQ(o.code, 0) << o.output;
  for (const char* f : {"summary.csv", "per_bundle.csv", "cp_size.csv", "manifest.cfg"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  EXPECT_EQ(slurp(dir_ / "out" / "summary.csv"),
            "algorithm,N_b,rate_bps,buffer_bundles,avg_time_ms,reroutes_total,undelivered\n"
            "proposed,1,plan,inf,17000.000,0,0\n");
  EXPECT_EQ(slurp(dir_ / "out" / "per_bundle.csv"),
            "bundle_id,t_gen_ms,t_delivered_ms,hops,reroutes,delivered\n0,0,17000,4,0,1\n");
}

TEST_F(Cli, ProposedNeverReroutesOnGeneratedScenario) {
  const auto o = cgrsim(std::string("run --generate ") + kSmall +
                        " --algo proposed --nb 100 --period-s 3600 --buffer 2 --out " + path("out"));
  ASSERT_EQ(o.code, 0) << o.output;
  const auto summary = slurp(dir_ / "out" / "summary.csv");
  const auto row = summary.substr(summary.find('\n') + 1);
  // algorithm,N_b,rate,buffer,avg,reroutes,undelivered
  std::stringstream ss(row);
  std::string field;
  std::vector<std::string> cols;
  while (std::getline(ss, field, ',')) cols.push_back(field);
  ASSERT_EQ(cols.size(), 7u) << row;
  EXPECT_EQ(cols[0], "proposed");
  EXPECT_EQ(cols[3], "2");
  EXPECT_EQ(cols[5], "0");
}

TEST_F(Cli, SweepParallelMatchesSerial) {
  const std::string common = std::string("sweep --generate ") + kSmall +
                             " --algo proposed,benchmark --nb 20,60 --period-s 3600 --buffer 1,inf";
  ASSERT_EQ(cgrsim(common + " --out " + path("par")).code, 0);
  ASSERT_EQ(cgrsim(common + " --serial --out " + path("ser")).code, 0);
  const auto par = slurp(dir_ / "par" / "summary.csv");
  EXPECT_EQ(par, slurp(dir_ / "ser" / "summary.csv"));
  EXPECT_EQ(std::count(par.begin(), par.end(), '\n'), 9);  // header and 2 x 2 x 2 points
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "par"))
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      ++files;
      const auto rel = fs::relative(e.path(), dir_ / "par");
      EXPECT_EQ(slurp(e.path()), slurp(dir_ / "ser" / rel)) << rel;
    }
  EXPECT_GT(files, 1u);
}
