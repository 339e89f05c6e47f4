#include "squirrels/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "squirrels/errors.hpp"

namespace squirrels {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary codecs assume a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_f64(std::string& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }
  double f64() {
    double v;
    take(&v, 8);
    return v;
  }
  void skip(size_t n) {
    need(n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw InvalidInput("truncated binary payload");
  }
  void take(void* dst, size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& bytes_;
  size_t pos_ = 0;
};

bool has_magic(const std::string& bytes, const char (&magic)[8]) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), magic, 8) == 0;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw IoError(path, "cannot create directory: " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

std::string encode_matrix_json(const ComplexMatrix& m) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      entries.push_back({m(i, j).real(), m(i, j).imag()});
  json doc = {{"n_half", m.rows() / 2}, {"entries", entries}};
  return doc.dump() + "\n";
}

std::string encode_matrix_binary(const ComplexMatrix& m) {
  std::string out(kMatrixMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(m.rows() / 2));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_f64(out, m(i, j).real());
      put_f64(out, m(i, j).imag());
    }
  return out;
}

ComplexMatrix decode_matrix(const std::string& bytes) {
  if (has_magic(bytes, kMatrixMagic)) {
    Reader r(bytes);
    r.skip(8);
    const std::uint32_t n_half = r.u32();
    if (n_half > 4096) throw InvalidInput("matrix window too large");
    const int d = 2 * static_cast<int>(n_half) + 1;
    ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double re = r.f64();
        m(i, j) = Complex(re, r.f64());
      }
    if (!r.done()) throw InvalidInput("trailing bytes after matrix payload");
    return m;
  }
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("matrix JSON parse error: ") + e.what());
  }
  if (!doc.contains("n_half") || !doc.contains("entries")) {
    throw InvalidInput("matrix JSON needs \"n_half\" and \"entries\"");
  }
  const int n_half = doc["n_half"].get<int>();
  if (n_half < 0) throw InvalidInput("matrix JSON: n_half must be >= 0");
  const int d = 2 * n_half + 1;
  const auto& entries = doc["entries"];
  if (!entries.is_array() || entries.size() != static_cast<size_t>(d) * d) {
    throw InvalidInput("matrix JSON: expected " + std::to_string(d * d) + " entries");
  }
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto& e = entries[static_cast<size_t>(i) * d + j];
      if (!e.is_array() || e.size() != 2) throw InvalidInput("matrix JSON: entry is not [re, im]");
      m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

void write_matrix(const std::string& path, const ComplexMatrix& m, MatrixFormat fmt) {
  write_file(path, fmt == MatrixFormat::json ? encode_matrix_json(m) : encode_matrix_binary(m));
}

ComplexMatrix read_matrix(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_matrix(bytes);
  } catch (const InvalidInput& e) {
    throw IoError(path, e.what());
  }
}

SpectrogramMeta SpectrogramMeta::from(const Discretization& disc, const CouplingConfig& cfg) {
  SpectrogramMeta meta;
  meta.g_abs = cfg.g_abs;
  meta.n_half = disc.n_half();
  meta.buffer = disc.buffer();
  meta.m_theta = disc.m_theta();
  meta.m_phi = disc.m_phi();
  meta.tail_tol = disc.tail_tol();
  return meta;
}

Discretization SpectrogramMeta::discretization() const {
  return Discretization(n_half, CouplingConfig{g_abs}, {tail_tol, buffer, m_theta, m_phi});
}

std::string encode_meta_json(const SpectrogramMeta& meta) {
  json doc = {{"g_abs", meta.g_abs},
              {"N", meta.n_half},
              {"B", meta.buffer},
              {"M_theta", meta.m_theta},
              {"M_phi", meta.m_phi},
              {"tail_tol", meta.tail_tol},
              {"noise_level", meta.noise_level},
              {"realized_noise", meta.realized_noise},
              {"seed", meta.seed}};
  return doc.dump(2) + "\n";
}

SpectrogramMeta decode_meta_json(const std::string& text) {
  SpectrogramMeta meta;
  try {
    const json doc = json::parse(text);
    meta.g_abs = doc.at("g_abs").get<double>();
    meta.n_half = doc.at("N").get<int>();
    meta.buffer = doc.at("B").get<int>();
    meta.m_theta = doc.at("M_theta").get<int>();
    meta.m_phi = doc.value("M_phi", 2 * (meta.n_half + meta.buffer) + 1);
    meta.tail_tol = doc.value("tail_tol", 1e-13);
    meta.noise_level = doc.at("noise_level").get<double>();
    meta.realized_noise = doc.value("realized_noise", 0.0);
    meta.seed = doc.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("spectrogram sidecar: ") + e.what());
  }
  return meta;
}

std::string sidecar_path(const std::string& data_path) {
  std::filesystem::path p(data_path);
  p.replace_extension(".json");
  if (p.string() == data_path) p = data_path + ".meta.json";
  return p.string();
}

void write_spectrogram(const std::string& path, const Spectrogram& y, const SpectrogramMeta& meta,
                       SpectrogramFormat fmt) {
  if (y.n_half != meta.n_half || y.buffer != meta.buffer || y.m_theta() != meta.m_theta) {
    throw ConfigError("write_spectrogram: metadata does not match the spectrogram grid");
  }
  const int out_half = y.out_half();
  std::string body;
  if (fmt == SpectrogramFormat::csv) {
    std::ostringstream os;
    os << "l,theta_index,theta,value\n";
    for (int l = -out_half; l <= out_half; ++l) {
      for (int j = 0; j < y.m_theta(); ++j) {
        const double theta = -kPi + kTwoPi * j / y.m_theta();
        os << l << ',' << j << ',' << format_double(theta) << ',' << format_double(y.at(l, j))
           << '\n';
      }
    }
    body = os.str();
  } else {
    body.assign(kSpectrogramMagic, 8);
    put_u32(body, static_cast<std::uint32_t>(y.n_half));
    put_u32(body, static_cast<std::uint32_t>(y.buffer));
    put_u32(body, static_cast<std::uint32_t>(y.m_theta()));
    for (int l = -out_half; l <= out_half; ++l)
      for (int j = 0; j < y.m_theta(); ++j) put_f64(body, y.at(l, j));
  }
  write_file(path, body);
  write_file(sidecar_path(path), encode_meta_json(meta));
}

LoadedSpectrogram read_spectrogram(const std::string& path) {
  const std::string side = sidecar_path(path);
  SpectrogramMeta meta;
  try {
    meta = decode_meta_json(read_file(side));
  } catch (const InvalidInput& e) {
    throw IoError(side, e.what());
  }
  const std::string bytes = read_file(path);
  const int out_half = meta.n_half + meta.buffer;
  Spectrogram y{meta.n_half, meta.buffer, RealMatrix::Zero(2 * out_half + 1, meta.m_theta)};
  try {
    if (has_magic(bytes, kSpectrogramMagic)) {
      Reader r(bytes);
      r.skip(8);
      const auto n = static_cast<int>(r.u32());
      const auto b = static_cast<int>(r.u32());
      const auto mt = static_cast<int>(r.u32());
      if (n != meta.n_half || b != meta.buffer || mt != meta.m_theta) {
        throw InvalidInput("binary header disagrees with sidecar");
      }
      for (int i = 0; i < y.p.rows(); ++i)
        for (int j = 0; j < y.p.cols(); ++j) y.p(i, j) = r.f64();
      if (!r.done()) throw InvalidInput("trailing bytes after spectrogram payload");
    } else {
      std::istringstream in(bytes);
      std::string line;
      if (!std::getline(in, line) || line.rfind("l,theta_index,theta,value", 0) != 0) {
        throw InvalidInput("missing CSV header l,theta_index,theta,value");
      }
      std::vector<char> seen(static_cast<size_t>(y.p.size()), 0);
      size_t count = 0;
      while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        int l = 0, j = 0;
        double theta = 0.0, value = 0.0;
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream ls(line);
        if (!(ls >> l >> c1 >> j >> c2 >> theta >> c3 >> value) || c1 != ',' || c2 != ',' ||
            c3 != ',') {
          throw InvalidInput("malformed CSV row: " + line);
        }
        if (std::abs(l) > out_half || j < 0 || j >= meta.m_theta) {
          throw InvalidInput("CSV row outside the sidecar grid: " + line);
        }
        if (std::abs(theta - (-kPi + kTwoPi * j / meta.m_theta)) > 1e-9) {
          throw InvalidInput("CSV theta does not match theta_index: " + line);
        }
        const size_t idx = static_cast<size_t>(l + out_half) * meta.m_theta + j;
        if (seen[idx]) throw InvalidInput("duplicate CSV row: " + line);
        seen[idx] = 1;
        ++count;
        y.p(l + out_half, j) = value;
      }
      if (count != seen.size()) throw InvalidInput("CSV does not cover the full grid");
    }
  } catch (const InvalidInput& e) {
    throw IoError(path, e.what());
  }
  return {std::move(y), meta};
}

}  // namespace squirrels
