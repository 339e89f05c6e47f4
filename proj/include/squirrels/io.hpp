#pragma once

#include <cstdint>
#include <string>

#include "squirrels/grids.hpp"

namespace squirrels {

enum class MatrixFormat { json, binary };

inline constexpr char kMatrixMagic[8] = {'S', 'Q', 'R', 'L', 'M', 'A', 'T', '1'};
inline constexpr char kSpectrogramMagic[8] = {'S', 'Q', 'R', 'L', 'S', 'P', 'G', '1'};

/// {"n_half": N, "entries": [[re, im], ...]} in row-major order.
std::string encode_matrix_json(const ComplexMatrix& m);
/// 8-byte magic, u32 LE N, then row-major (re, im) pairs as f64 LE.
std::string encode_matrix_binary(const ComplexMatrix& m);
/// Decodes either encoding (binary detected by its magic).
ComplexMatrix decode_matrix(const std::string& bytes);

void write_matrix(const std::string& path, const ComplexMatrix& m,
                  MatrixFormat fmt = MatrixFormat::json);
ComplexMatrix read_matrix(const std::string& path);

/// Sidecar metadata stored next to every spectrogram file.
struct SpectrogramMeta {
  double g_abs = 1.0;
  int n_half = 0;
  int buffer = 0;
  int m_theta = 0;
  int m_phi = 0;
  double tail_tol = 1e-13;
  double noise_level = 0.0;      // asserted delta
  double realized_noise = 0.0;   // measured ||noise|| in the quadrature norm
  std::uint64_t seed = 0;

  static SpectrogramMeta from(const Discretization& disc, const CouplingConfig& cfg);
  /// Discretization reproducing the grids recorded here.
  Discretization discretization() const;
};

std::string encode_meta_json(const SpectrogramMeta& meta);
SpectrogramMeta decode_meta_json(const std::string& text);

/// "<stem>.json" next to a spectrogram file.
std::string sidecar_path(const std::string& data_path);

enum class SpectrogramFormat { csv, binary };

/// Writes the values (CSV "l,theta_index,theta,value" or the binary variant) and the sidecar.
void write_spectrogram(const std::string& path, const Spectrogram& y, const SpectrogramMeta& meta,
                       SpectrogramFormat fmt = SpectrogramFormat::csv);

struct LoadedSpectrogram {
  Spectrogram y;
  SpectrogramMeta meta;
};

/// Reads values and sidecar; the grid recorded in the sidecar must match the file.
LoadedSpectrogram read_spectrogram(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace squirrels
