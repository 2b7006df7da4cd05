#include <doctest.h>

#include <cmath>
#include <string>

#include "ahres/config.hpp"
#include "ahres/io.hpp"

using namespace ahres;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const RunConfig c = parse_config(R"({"model": {"type": "hyperbolic-plane"}})");
  CHECK(c.model.n == 2);
  CHECK(c.run.N == 128);
  CHECK(c.run.modes == std::vector<int>{0});
  CHECK(c.absorption.mode == AbsorptionMode::paper_sigma_dependent);
  CHECK(c.absorption.C == 5);
  CHECK(c.seed == 1);
  CHECK(c.resolved.contains("solver"));
}

TEST_CASE("unknown keys name the pointer") {
  const std::string t = R"({"model": {"type": "hyperbolic-plane", "bogus": 1}})";
  CHECK(kind_of(t) == ErrorKind::validation);
  CHECK(message_of(t).find("/model/bogus") != std::string::npos);
  CHECK(kind_of(R"({"model": {"type": "hyperbolic-plane"}, "grid": {"N": "x"}})") == ErrorKind::validation);
}

TEST_CASE("window threshold refused at load") {
  const std::string t =
      R"({"model": {"type": "hyperbolic-plane"}, "solver": {"s": 2, "window": {"re": [-1, 1], "im": [-4, -1]}}})";
  CHECK(kind_of(t) == ErrorKind::validation);
  CHECK(message_of(t).find("violates") != std::string::npos);
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig a = parse_config(R"({"model": {"type": "hyperbolic-plane"}})");
  const RunConfig b = parse_config(R"({"model": {"type": "hyperbolic-plane"}, "grid": {"N": 128}})");
  const RunConfig c = parse_config(R"({"model": {"type": "hyperbolic-plane"}, "grid": {"N": 130}})");
  CHECK(config_hash(a.resolved).size() == 16);
  CHECK(config_hash(a.resolved) == config_hash(b.resolved));
  CHECK(config_hash(a.resolved) != config_hash(c.resolved));
}

TEST_CASE("json output keeps 17 significant digits") {
  nlohmann::json j;
  j["b"] = 0.1;
  j["a"] = 1.0 / 3.0;
  j["c"] = std::nan("");
  const std::string s = dump_json(j);
  CHECK(s.find("0.33333333333333331") != std::string::npos);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("null") != std::string::npos);
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(std::stod(fmt17(1.0 / 3.0)) == 1.0 / 3.0);
}
