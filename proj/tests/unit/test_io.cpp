#include <doctest.h>

#include <filesystem>
#include <random>

#include "squirrels/errors.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/io.hpp"
#include "squirrels/states.hpp"

using namespace squirrels;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "squirrels_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("matrix codec round trips bit-exactly") {
  const auto rho = make_random_density(3, 44).matrix();
  CHECK(decode_matrix(encode_matrix_json(rho)) == rho);
  CHECK(decode_matrix(encode_matrix_binary(rho)) == rho);

  const auto bin = encode_matrix_binary(rho);
  CHECK(bin.substr(0, 8) == "SQRLMAT1");
  CHECK(bin.size() == 8 + 4 + 16 * 49);
  CHECK(static_cast<unsigned char>(bin[8]) == 3);

  const auto jpath = scratch("m.json").string();
  const auto bpath = scratch("m.bin").string();
  write_matrix(jpath, rho, MatrixFormat::json);
  write_matrix(bpath, rho, MatrixFormat::binary);
  CHECK(read_matrix(jpath) == rho);
  CHECK(read_matrix(bpath) == rho);
}

TEST_CASE("matrix codec rejects malformed input") {
  CHECK_THROWS_AS(decode_matrix("{\"n_half\": 1, \"entries\": [[1,0]]}"), InvalidInput);
  CHECK_THROWS_AS(decode_matrix("not json"), InvalidInput);
  std::string truncated = encode_matrix_binary(ComplexMatrix::Identity(3, 3));
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_matrix(truncated), InvalidInput);
  CHECK_THROWS_AS(read_matrix(scratch("missing.json").string()), IoError);
}

TEST_CASE("spectrogram files round trip") {
  const CouplingConfig cfg{1.0};
  const Discretization disc(4, cfg);
  const auto y = apply_factorized(make_random_density(4, 8).matrix(), cfg, disc);
  auto meta = SpectrogramMeta::from(disc, cfg);
  meta.noise_level = 0.01;
  meta.seed = 7;

  for (auto fmt : {SpectrogramFormat::csv, SpectrogramFormat::binary}) {
    const auto path = scratch(fmt == SpectrogramFormat::csv ? "y.csv" : "y.bin").string();
    write_spectrogram(path, y, meta, fmt);
    CHECK(fs::exists(sidecar_path(path)));
    const auto loaded = read_spectrogram(path);
    CHECK(loaded.y.p == y.p);
    CHECK(loaded.meta.n_half == 4);
    CHECK(loaded.meta.buffer == disc.buffer());
    CHECK(loaded.meta.m_theta == disc.m_theta());
    CHECK(loaded.meta.noise_level == 0.01);
    CHECK(loaded.meta.seed == 7);
    const auto d2 = loaded.meta.discretization();
    CHECK(d2.m_phi() == disc.m_phi());
  }
  const auto text = read_file(scratch("y.csv").string());
  CHECK(text.rfind("l,theta_index,theta,value\n", 0) == 0);
}

TEST_CASE("spectrogram reader validates the grid") {
  const CouplingConfig cfg{1.0};
  const Discretization disc(2, cfg);
  auto meta = SpectrogramMeta::from(disc, cfg);
  const auto path = scratch("bad.csv").string();
  write_spectrogram(path, zero_spectrogram(disc), meta);
  auto text = read_file(path);
  text.resize(text.rfind('\n', text.size() - 2) + 1);  // drop the last row
  write_file(path, text);
  CHECK_THROWS_AS(read_spectrogram(path), IoError);
  CHECK_THROWS_AS(read_spectrogram(scratch("none.csv").string()), IoError);
}
