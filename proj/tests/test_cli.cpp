#include <cstdio>
#include <sys/wait.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "nrs/util.hpp"

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result invoke(const std::string& args) {
  const std::string cmd = std::string(NRS_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_config(const fixtures::TempDir& dir, const std::string& items = "items.jsonl") {
  const auto path = dir / "config.json";
  nrs::write_file(path, R"({"experiment_id":"cli","seed":1,"output_dir":"out",
    "corpus":{"items":")" + items + R"(","history":"history.csv",
              "impressions":"impressions.csv","party_map":"party_map.json"},
    "list_size":10,"models":[{"type":"rp3b"}],"rerankers":[{"method":"none"}]})");
  return path.string();
}

}  // namespace

TEST_CASE("cli") {
  fixtures::TempDir dir("cli");
  REQUIRE(invoke("synth --out " + dir.path().string()).code == 0);
  const auto config = write_config(dir);

  SUBCASE("ntv prints the target row") {
    const auto r = invoke("ntv --config " + config);
    CHECK(r.code == 0);
    CHECK(r.output.find("ntv,") != std::string::npos);
    CHECK(r.output.find("0.133333") != std::string::npos);
  }
  SUBCASE("unknown flag exits 1 with usage") {
    const auto r = invoke("ntv --config " + config + " --bogus");
    CHECK(r.code == 1);
    CHECK(r.output.find("--config") != std::string::npos);
  }
  SUBCASE("post-processing without candidates exits 1 naming the stage") {
    const auto r = invoke("run --from-stage post --config " + config);
    CHECK(r.code == 1);
    CHECK(r.output.find("'pre'") != std::string::npos);
  }
  SUBCASE("missing corpus file exits 2") {
    const auto r = invoke("validate --config " + write_config(dir, "absent.jsonl"));
    CHECK(r.code == 2);
    CHECK(r.output.find("absent.jsonl") != std::string::npos);
  }
  SUBCASE("run then export") {
    const auto r = invoke("run --config " + config + " --format csv");
    CHECK(r.code == 0);
    CHECK(r.output.find("rp3b,none,") != std::string::npos);
    const auto e = invoke("export --config " + config + " --model rp3b");
    CHECK(e.code == 0);
    CHECK(e.output.find("\"experimentId\"") != std::string::npos);
  }
}
