#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <harmeas/cli.hpp>
#include <harmeas/serialize.hpp>

using namespace harmeas;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

fs::path test_root() {
  static fs::path root = [] {
    auto p = fs::temp_directory_path() / "harmeas_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    setenv("HARMEAS_OUTPUT_ROOT", p.c_str(), 1);
    return p;
  }();
  return root;
}

Run run(std::vector<std::string> args) {
  test_root();
  args.insert(args.begin(), "harmeas");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Json result_of(const std::string& dir) {
  return Json::parse(read_text_file((test_root() / dir / "result.json").string()));
}

const std::string kZ2 = "graph={\"kind\":\"lattice\",\"dim\":2,\"half_width\":40}";

}  // namespace

TEST_CASE("cli finite measure on the symmetric pair") {
  auto r = run({"hmeasure-finite", "--set", kZ2, "target=[[-1,0],[1,0]]", "base=[0,0]", "params.m=32",
                "-o", "fin"});
  REQUIRE(r.code == kExitOk);
  auto j = result_of("fin");
  CHECK(j["result"]["measure"]["weights"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["provenance"]["version"] == kVersion);
  CHECK(fs::exists(test_root() / "fin" / "data.csv"));
  auto cfg = Json::parse(read_text_file((test_root() / "fin" / "config.json").string()));
  CHECK(cfg["graph"]["shape"] == "diamond");
  CHECK(cfg["solver"]["rel_tol"].get<double>() == 1e-10);
}

TEST_CASE("cli validation errors carry field paths") {
  auto empty = run({"hmeasure-finite", "--set", kZ2, "target=[]", "base=[0,0]", "params.m=8"});
  CHECK(empty.code == kExitValidation);
  auto e = Json::parse(empty.err);
  CHECK(e["error"]["path"] == "target");

  auto unknown = run({"hmeasure-finite", "--set", kZ2, "target=[[0,0]]", "base=[0,0]", "params.m=8",
                      "params.radius=3"});
  CHECK(unknown.code == kExitValidation);
  CHECK(Json::parse(unknown.err)["error"]["path"] == "params.radius");

  auto coord = run({"hmeasure-finite", "--set", kZ2, "target=[[0,0],[99,0]]", "base=[0,0]", "params.m=8"});
  CHECK(coord.code == kExitValidation);
  CHECK(Json::parse(coord.err)["error"]["path"] == "target[1]");

  auto law = run({"env-sample", "--seed", "1", "--set",
                  "graph={\"kind\":\"environment\",\"half_width\":5,\"law\":{\"kind\":\"bernoulli\",\"p\":2}}"});
  CHECK(law.code == kExitValidation);
  CHECK(Json::parse(law.err)["error"]["path"] == "graph.law.kind");

  auto noseed = run({"env-sample", "--set",
                     "graph={\"kind\":\"environment\",\"half_width\":5,\"law\":{\"kind\":\"bernoulli\",\"p\":0.5}}"});
  CHECK(noseed.code == kExitValidation);
  CHECK(Json::parse(noseed.err)["error"]["path"] == "seed");

  CHECK(run({"no-such-command"}).code == kExitValidation);
}

TEST_CASE("cli transient schedule emits the Cauchy record") {
  auto r = run({"hmeasure-transient", "--set", "graph={\"kind\":\"lattice\",\"dim\":3,\"half_width\":65}",
                "target=[[0,0,0],[1,0,0]]", "base=[0,0,0]", "params.schedule=[16,32,64]", "-o", "tr"});
  REQUIRE(r.code == kExitOk);
  auto j = result_of("tr");
  CHECK(j["result"]["tv"].size() == 2);
  CHECK(j["result"]["cauchy"] == true);
}

TEST_CASE("cli commands run on small instances") {
  const std::string env =
      "graph={\"kind\":\"environment\",\"half_width\":24,\"law\":{\"kind\":\"bernoulli\",\"p\":0.7}}";
  CHECK(run({"env-sample", "--seed", "3", "--set", env, "params.write_graph=true", "-o", "env"}).code == 0);
  CHECK(fs::exists(test_root() / "env" / "graph.txt"));
  CHECK(run({"cluster", "--seed", "3", "--set", env, "params.audit_pairs=50", "-o", "cl"}).code == 0);
  CHECK(result_of("cl")["result"]["cluster_vertices"].get<int>() > 1000);
  CHECK(run({"green", "--set", kZ2, "base=[0,0]", "params.radii=[8,16]", "-o", "gr"}).code == 0);
  CHECK(run({"potential-kernel", "--set", kZ2, "base=[0,0]", "params.radii=[16,32]", "params.shells=[2,4,8]",
             "-o", "pk"}).code == 0);
  CHECK(run({"capacity", "--set", kZ2, "target=[[0,0]]", "base=[0,0]", "params.radii=[4,8,16]", "-o", "cap"})
            .code == 0);
  CHECK(result_of("cap")["result"]["recurrent"] == true);
  CHECK(run({"kesten-flow", "--set", kZ2, "base=[0,0]", "params.n=24", "-o", "kf"}).code == 0);
  CHECK(result_of("kf")["result"]["thomson"].get<double>() <=
        result_of("kf")["result"]["exact_capacity"].get<double>());
  CHECK(run({"hmeasure-recurrent", "--set", "graph={\"kind\":\"lattice\",\"dim\":2,\"half_width\":65}",
             "target=[[0,0],[1,0]]", "base=[0,0]", "params.radii=[32,64]", "params.bases=[[1,0]]", "-o", "rec"})
            .code == 0);
  CHECK(result_of("rec")["result"]["base_point_max_tv"].get<double>() < 0.01);
  CHECK(run({"hmeasure-profile", "--set", kZ2, "target=[[0,0],[1,0]]", "base=[0,0]", "params.window=30",
             "params.observers=[[-4,0],[-8,0]]", "params.limit_m=30", "-o", "prof"}).code == 0);
  CHECK(result_of("prof")["result"]["observers"].size() == 2);
  CHECK(run({"harnack-audit", "--set", kZ2, "base=[0,0]", "params.radii=[2]", "params.boukricha=true", "-o",
             "ha"}).code == 0);
  CHECK(run({"ge-audit", "--set", "graph={\"kind\":\"lattice\",\"dim\":3,\"half_width\":17}", "base=[0,0,0]",
             "params.radius=16", "params.gamma=1", "params.d_min=2", "params.d_max=8", "-o", "ge"}).code == 0);
  CHECK(run({"annulus-audit", "--set", kZ2, "base=[0,0]", "params.r=2", "params.m=[4,8]", "-o", "an"}).code ==
        0);
  CHECK(run({"mc-check", "--seed", "5", "--set", kZ2, "target=[[0,0],[1,0]]", "base=[3,0]",
             "params.stop_radius=6", "params.center=[0,0]", "params.walks=2000", "-o", "mc"}).code == 0);
  auto mc = run({"mc-check", "--set", kZ2, "target=[[0,0]]", "base=[3,0]", "params.stop_radius=6"});
  CHECK(mc.code == kExitValidation);
}

TEST_CASE("cli numerical flags exit with 3") {
  auto r = run({"potential-kernel", "--set", kZ2, "base=[0,0]", "params.radii=[4,8]", "params.gap_tol=1e-12",
                "-o", "flagged"});
  CHECK(r.code == kExitFlagged);
  CHECK(!result_of("flagged")["flags"].empty());
}

TEST_CASE("cli compare") {
  auto root = test_root();
  write_text_file((root / "a.json").string(),
                  R"({"result":{"measure":{"support":[{"id":0},{"id":1}],"weights":[0.5,0.5]}}})");
  write_text_file((root / "b.json").string(),
                  R"({"result":{"measure":{"support":[{"id":0},{"id":1}],"weights":[0.6,0.4]}}})");
  write_text_file((root / "c.json").string(),
                  R"({"result":{"measure":{"support":[{"id":0},{"id":2}],"weights":[0.6,0.4]}}})");
  auto same = run({"compare", (root / "a.json").string(), (root / "a.json").string()});
  CHECK(same.code == kExitOk);
  CHECK(Json::parse(same.out)["tv"].get<double>() == 0.0);
  auto diff = run({"compare", (root / "a.json").string(), (root / "b.json").string()});
  CHECK(Json::parse(diff.out)["tv"].get<double>() == doctest::Approx(0.1));
  CHECK(run({"compare", (root / "a.json").string(), (root / "b.json").string(), "--tol", "0.05"}).code ==
        kExitFlagged);
  auto mismatch = run({"compare", (root / "a.json").string(), (root / "c.json").string()});
  CHECK(mismatch.code == kExitValidation);
  CHECK(mismatch.err.find("1 2") != std::string::npos);

  // Two routes on a recurrent instance.
  REQUIRE(run({"hmeasure-finite", "--set", kZ2, "target=[[0,0],[2,1]]", "base=[0,0]", "params.m=39", "-o",
               "route_a"}).code == 0);
  REQUIRE(run({"hmeasure-recurrent", "--set", "graph={\"kind\":\"lattice\",\"dim\":2,\"half_width\":129}",
               "target=[[0,0],[2,1]]", "base=[0,0]", "params.radii=[64,128]", "-o", "route_b"}).code == 0);
  auto routes = run({"compare", (root / "route_a" / "result.json").string(),
                     (root / "route_b" / "result.json").string()});
  CHECK(routes.code == kExitOk);
  CHECK(Json::parse(routes.out)["tv"].get<double>() < 0.02);
}

TEST_CASE("cli outputs do not depend on the thread count") {
  const std::vector<std::string> base{"hmeasure-transient", "--set",
                                      "graph={\"kind\":\"lattice\",\"dim\":3,\"half_width\":33}",
                                      "target=[[0,0,0],[2,0,0]]", "base=[0,0,0]", "params.schedule=[16,32]",
                                      "solver.dense_threshold=0"};
  auto a = base, b = base;
  a.insert(a.end(), {"--threads", "1", "-o", "t1"});
  b.insert(b.end(), {"--threads", "3", "-o", "t3"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(read_text_file((test_root() / "t1" / "result.json").string()) ==
        read_text_file((test_root() / "t3" / "result.json").string()));
  CHECK(read_text_file((test_root() / "t1" / "data.csv").string()) ==
        read_text_file((test_root() / "t3" / "data.csv").string()));
}
