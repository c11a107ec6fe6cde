#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "helpers.hpp"
#include "qtraj/error.hpp"
#include "qtraj/io.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

bool same_description(const ModelDescription& a, const ModelDescription& b) {
  if (a.dim != b.dim || a.hamiltonian != b.hamiltonian || a.diffusive_ops != b.diffusive_ops ||
      a.dissipative_ops != b.dissipative_ops || a.jump_channels.size() != b.jump_channels.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.jump_channels.size(); ++k) {
    const auto& x = a.jump_channels[k];
    const auto& y = b.jump_channels[k];
    if (x.label != y.label || x.weight != y.weight || x.kraus != y.kraus) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("model JSON round trip is lossless") {
  RandomStream rng(1);
  for (int i = 0; i < 10; ++i) {
    const auto desc = random_model(2 + static_cast<std::size_t>(i % 3), rng).description();
    const auto back = parse_model_json(model_to_json(desc));
    CHECK(same_description(desc, back));
    CHECK(model_hash(desc) == model_hash(back));
  }
}

TEST_CASE("model hash distinguishes models") {
  CHECK(model_hash(heterodyne().description()) != model_hash(homodyne(0.0).description()));
  CHECK(model_hash(heterodyne().description()).size() == 16);
}

TEST_CASE("parsing accepts real shorthand and rejects malformed input") {
  const std::string text = R"({"dimension": 2, "hamiltonian": [[1, 0], [0, -1]],
                               "diffusive_ops": [[[0, 0], [[1, 0], 0]]]})";
  const auto d = parse_model_json(text);
  CHECK(d.hamiltonian == sz());
  CHECK(d.diffusive_ops.front() == sm());
  CHECK(d.jump_channels.empty());

  auto code = [](const std::string& s) {
    try {
      parse_model_json(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("{") == ErrorCode::ConfigError);
  CHECK(code(R"({"hamiltonian": [[0]]})") == ErrorCode::ConfigError);
  CHECK(code(R"({"dimension": 2, "hamiltonian": [[0, 0]]})") == ErrorCode::DimensionMismatch);
  CHECK(code(R"({"dimension": 1, "hamiltonian": [["x"]]})") == ErrorCode::ConfigError);
  CHECK(code(R"({"dimension": 1, "hamiltonian": [[0]], "jump_channels": [{"weight": 1}]})") ==
        ErrorCode::ConfigError);
}

TEST_CASE("number formatting uses 17 significant digits") {
  CHECK(format_double(0.1) == "1.0000000000000001e-01");
  CHECK(format_double(-2.0) == "-2.0000000000000000e+00");
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("metadata header and CSV layouts") {
  const RunMetadata meta{"simulate", "abc", 7, "kraus", 1e-3, "mode=posterior"};
  const std::string line = metadata_line(meta);
  CHECK(line.rfind("# qtraj version=", 0) == 0);
  for (const char* key : {"command=simulate", "model_hash=abc", "seed=7", "scheme=kraus",
                          "dt=1.0000000000000000e-03", "rng=philox4x32-10", "mode=posterior"}) {
    CHECK(line.find(key) != std::string::npos);
  }

  BlochHistogram h;
  h.n_polar = 2;
  h.n_azimuth = 3;
  h.counts.assign(6, 0);
  h.dwell_time.assign(6, 0.0);
  h.counts[h.index(1, 2)] = 4;
  h.dwell_time[h.index(1, 2)] = 0.5;
  h.total = 4;
  std::ostringstream out;
  write_histogram_csv(out, meta, h);
  std::istringstream in(out.str());
  std::string header, columns, row;
  std::getline(in, header);
  std::getline(in, columns);
  CHECK(header.rfind("# qtraj", 0) == 0);
  CHECK(columns == "theta_index,phi_index,dwell_time,count");
  int rows = 0;
  std::string last;
  while (std::getline(in, row)) {
    ++rows;
    last = row;
  }
  CHECK(rows == 6);
  CHECK(last == "1,2,5.0000000000000000e-01,4");
}

}
