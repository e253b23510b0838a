#include "cavity/tabular.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace cavity::io {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw NumericalError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw NumericalError("rename to '" + path.string() + "' failed: " + ec.message());
}

namespace {

// Compact SHA-1, sufficient for content fingerprints.
struct Sha1 {
  uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
  uint64_t total = 0;
  std::array<uint8_t, 64> block{};
  std::size_t fill = 0;

  static uint32_t rol(uint32_t v, int n) { return (v << n) | (v >> (32 - n)); }

  void process(const uint8_t* p) {
    uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = uint32_t(p[4 * i]) << 24 | uint32_t(p[4 * i + 1]) << 16 | uint32_t(p[4 * i + 2]) << 8 |
             uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
  }

  void update(const void* data, std::size_t len) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    total += len;
    while (len > 0) {
      const std::size_t take = std::min(len, block.size() - fill);
      std::memcpy(block.data() + fill, p, take);
      fill += take;
      p += take;
      len -= take;
      if (fill == block.size()) {
        process(block.data());
        fill = 0;
      }
    }
  }

  std::string hex() {
    const uint64_t bits = total * 8;
    const uint8_t one = 0x80;
    update(&one, 1);
    const uint8_t zero = 0;
    while (fill != 56) update(&zero, 1);
    uint8_t len[8];
    for (int i = 0; i < 8; ++i) len[i] = uint8_t(bits >> (56 - 8 * i));
    update(len, 8);
    char out[41];
    for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 40);
  }
};

}  // namespace

std::string git_blob_sha1(const std::string& content) {
  Sha1 sha;
  const std::string header = "blob " + std::to_string(content.size());
  sha.update(header.data(), header.size() + 1);  // includes the NUL
  sha.update(content.data(), content.size());
  return sha.hex();
}

std::string csv_from_map(const SpectralMap& map) {
  std::string out = "delta_c_khz,delta_p_khz,t_norm,f_norm,root_count\n";
  for (std::size_t ic = 0; ic < map.nc(); ++ic) {
    const std::string c = format_full(linear_khz_from_angular(map.delta_c_axis[ic]));
    for (std::size_t ip = 0; ip < map.np(); ++ip) {
      out += c;
      out += ',';
      out += format_full(linear_khz_from_angular(map.delta_p_axis[ip]));
      out += ',';
      out += format_full(map.t(ic, ip));
      out += ',';
      out += format_full(map.f(ic, ip));
      out += ',';
      out += std::to_string(map.root_count[ic * map.np() + ip]);
      out += '\n';
    }
  }
  return out;
}

std::string csv_from_trajectory(const Trajectory& traj) {
  std::string out = "time_s,alpha_re,alpha_im,intensity,mean_z\n";
  for (const TrajectorySample& s : traj.samples) {
    out += format_full(s.t);
    out += ',';
    out += format_full(s.alpha.real());
    out += ',';
    out += format_full(s.alpha.imag());
    out += ',';
    out += format_full(std::norm(s.alpha));
    out += ',';
    out += format_full(s.mean_z);
    out += '\n';
  }
  return out;
}

std::string csv_from_roots(const SteadyStateResult& result, const Detuning& det) {
  std::string out =
      "root_index,delta_c_khz,delta_p_khz,x_photons,alpha_re,alpha_im,"
      "gamma_coll_re_khz,gamma_coll_im_khz,stability,selected,t_norm,f_norm\n";
  const std::string c = format_full(linear_khz_from_angular(det.delta_c));
  const std::string p = format_full(linear_khz_from_angular(det.delta_p));
  for (std::size_t i = 0; i < result.roots.size(); ++i) {
    const RootInfo& r = result.roots[i];
    out += std::to_string(i);
    out += ',';
    out += c;
    out += ',';
    out += p;
    out += ',';
    out += format_full(r.x);
    out += ',';
    out += format_full(r.alpha.real());
    out += ',';
    out += format_full(r.alpha.imag());
    out += ',';
    out += format_full(linear_khz_from_angular(r.gamma_coll.real()));
    out += ',';
    out += format_full(linear_khz_from_angular(r.gamma_coll.imag()));
    out += ',';
    out += to_string(r.stable);
    out += ',';
    out += (i == result.selected ? "1" : "0");
    out += ',';
    out += format_full(i == result.selected ? result.t_norm : 0.0);
    out += ',';
    out += format_full(i == result.selected ? result.f_norm : 0.0);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json khz_axis(const std::vector<double>& axis) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : axis) arr.push_back(linear_khz_from_angular(v));
  return arr;
}

}  // namespace

nlohmann::json json_from_map(const SpectralMap& map) {
  nlohmann::json j;
  j["schema"] = "cavity-dressed/map-v1";
  j["delta_c_khz"] = khz_axis(map.delta_c_axis);
  j["delta_p_khz"] = khz_axis(map.delta_p_axis);
  j["t_norm"] = map.t_norm;
  j["f_norm"] = map.f_norm;
  j["root_count"] = map.root_count;
  return j;
}

nlohmann::json json_from_trajectory(const Trajectory& traj) {
  nlohmann::json j;
  j["schema"] = "cavity-dressed/trajectory-v1";
  j["settled"] = traj.settled;
  j["n_steps"] = traj.n_steps;
  j["n_rejected"] = traj.n_rejected;
  j["max_bloch_excess"] = traj.max_bloch_excess;
  nlohmann::json rows = nlohmann::json::array();
  for (const TrajectorySample& s : traj.samples)
    rows.push_back({s.t, s.alpha.real(), s.alpha.imag(), std::norm(s.alpha), s.mean_z});
  j["samples"] = std::move(rows);
  j["columns"] = {"time_s", "alpha_re", "alpha_im", "intensity", "mean_z"};
  return j;
}

nlohmann::json json_from_roots(const SteadyStateResult& result, const Detuning& det) {
  nlohmann::json j;
  j["schema"] = "cavity-dressed/roots-v1";
  j["delta_c_khz"] = linear_khz_from_angular(det.delta_c);
  j["delta_p_khz"] = linear_khz_from_angular(det.delta_p);
  j["selected"] = result.selected;
  j["t_norm"] = result.t_norm;
  j["f_norm"] = result.f_norm;
  nlohmann::json rows = nlohmann::json::array();
  for (const RootInfo& r : result.roots) {
    rows.push_back({{"x_photons", r.x},
                    {"alpha_re", r.alpha.real()},
                    {"alpha_im", r.alpha.imag()},
                    {"gamma_coll_re_khz", linear_khz_from_angular(r.gamma_coll.real())},
                    {"gamma_coll_im_khz", linear_khz_from_angular(r.gamma_coll.imag())},
                    {"stability", to_string(r.stable)}});
  }
  j["roots"] = std::move(rows);
  return j;
}

}  // namespace cavity::io
