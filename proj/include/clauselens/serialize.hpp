#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "clauselens/errors.hpp"
#include "clauselens/policy_value_net.hpp"
#include "clauselens/risk_duals.hpp"

namespace clauselens {

/// Versioned binary policy checkpoint: magic tag, agent variant, network
/// shape table, row-major 64-bit parameters, dual state. Reloads bit-exact.
struct Checkpoint {
  std::string variant;
  bool has_net = false;
  NetParams net;
  DualState duals;
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'C', 'L', 'N', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void put_f64(std::ostream& out, double d) {
  put_u64(out, std::bit_cast<std::uint64_t>(d));
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ParseError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_u64(in));
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(detail::kCheckpointMagic, 8);
  detail::put_u32(out, detail::kCheckpointVersion);
  detail::put_u32(out, std::uint32_t(ckpt.variant.size()));
  out.write(ckpt.variant.data(), std::streamsize(ckpt.variant.size()));
  detail::put_u32(out, ckpt.has_net ? 1 : 0);
  if (ckpt.has_net) {
    detail::put_u32(out, std::uint32_t(ckpt.net.input_dim));
    detail::put_u32(out, std::uint32_t(ckpt.net.hidden_dim));
    detail::put_u32(out, std::uint32_t(ckpt.net.action_dim));
    detail::put_u64(out, ckpt.net.flat.size());
    for (double v : ckpt.net.flat) detail::put_f64(out, v);
  }
  for (double v : ckpt.duals.lambdas) detail::put_f64(out, v);
  for (double v : ckpt.duals.violation_means) detail::put_f64(out, v);
  if (!out) throw IoError("checkpoint write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(detail::kCheckpointMagic, 8))
    throw ParseError("'" + path + "' is not a checkpoint file");
  const auto version = detail::get_u32(in);
  if (version != detail::kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " +
                     std::to_string(version));
  Checkpoint ckpt;
  const auto name_len = detail::get_u32(in);
  ckpt.variant.resize(name_len);
  in.read(ckpt.variant.data(), name_len);
  if (!in) throw ParseError("checkpoint truncated");
  ckpt.has_net = detail::get_u32(in) != 0;
  if (ckpt.has_net) {
    const auto d = detail::get_u32(in);
    const auto h = detail::get_u32(in);
    const auto a = detail::get_u32(in);
    const auto count = detail::get_u64(in);
    ckpt.net = NetParams(d, h, a);
    if (ckpt.net.flat.size() != count)
      throw ParseError("checkpoint shape table inconsistent with payload");
    for (double& v : ckpt.net.flat) v = detail::get_f64(in);
  }
  for (double& v : ckpt.duals.lambdas) v = detail::get_f64(in);
  for (double& v : ckpt.duals.violation_means) v = detail::get_f64(in);
  return ckpt;
}

}  // namespace clauselens
