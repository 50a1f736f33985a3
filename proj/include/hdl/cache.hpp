#pragma once

// On-disk element tables. Layout: magic "HDLG1\0\0\0", u32 LE header length,
// JSON header, then the coefficient array as packed u32 LE. Loads rebuild the
// index and re-check every element and the closed-form order.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdl/twistgroup.hpp"

namespace hdl {

inline std::uint64_t fnv1a(const std::vector<Field::Elem>& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto v : data)
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ULL;
    }
  return h;
}

struct CacheResult {
  std::shared_ptr<const GroupTable> table;
  bool loaded = false;  // false: enumerated (and written if a directory was given)
  std::uint64_t checksum = 0;
};

namespace detail {
inline constexpr char kCacheMagic[8] = {'H', 'D', 'L', 'G', '1', 0, 0, 0};

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff), static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}
inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4] = {};
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw verification_error("cache file truncated");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}
}  // namespace detail

inline std::filesystem::path cache_path(const std::filesystem::path& dir, const GroupSpec& spec) {
  return dir / (spec.cache_key() + ".hdlg");
}

inline void save_table(const std::filesystem::path& file, const GroupTable& G) {
  nlohmann::ordered_json header;
  header["spec"] = G.spec().cache_key();
  header["order"] = G.size();
  header["stride"] = G.stride();
  header["checksum"] = fnv1a(G.raw());
  const std::string h = header.dump();
  std::filesystem::create_directories(file.parent_path());
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os.write(detail::kCacheMagic, 8);
    detail::put_u32(os, static_cast<std::uint32_t>(h.size()));
    os.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (auto v : G.raw()) detail::put_u32(os, v);
    if (!os) throw std::runtime_error("cannot write cache file " + tmp);
  }
  std::filesystem::rename(tmp, file);
}

inline std::shared_ptr<const GroupTable> load_table(const std::filesystem::path& file, const GroupSpec& spec,
                                                    std::uint64_t cap = GroupTable::kDefaultCap) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open cache file " + file.string());
  char magic[8] = {};
  is.read(magic, 8);
  if (!is || !std::equal(magic, magic + 8, detail::kCacheMagic)) throw verification_error("bad cache magic");
  const std::uint32_t hlen = detail::get_u32(is);
  std::string h(hlen, '\0');
  is.read(h.data(), hlen);
  const auto header = nlohmann::json::parse(h);
  if (header.at("spec").get<std::string>() != spec.cache_key()) throw verification_error("cache spec mismatch");
  const auto order = header.at("order").get<std::uint64_t>();
  const auto stride = header.at("stride").get<std::uint64_t>();
  if (order != spec.closed_form_order()) throw verification_error("cached order differs from the closed form");
  std::vector<Field::Elem> data(order * stride);
  for (auto& v : data) v = detail::get_u32(is);
  if (fnv1a(data) != header.at("checksum").get<std::uint64_t>()) throw verification_error("cache checksum mismatch");
  return std::make_shared<const GroupTable>(spec, std::move(data), cap);
}

// Loads from dir when present, else enumerates (and stores when dir is set).
inline CacheResult load_or_build(const GroupSpec& spec, const std::string& dir, std::uint64_t cap = GroupTable::kDefaultCap) {
  CacheResult out;
  if (!dir.empty()) {
    const auto file = cache_path(dir, spec);
    if (std::filesystem::exists(file)) {
      out.table = load_table(file, spec, cap);
      out.loaded = true;
      out.checksum = fnv1a(out.table->raw());
      return out;
    }
  }
  auto G = std::make_shared<const GroupTable>(spec, cap);
  check(G->size() == spec.closed_form_order(), "enumerated order differs from the closed form");
  if (!dir.empty()) save_table(cache_path(dir, spec), *G);
  out.table = std::move(G);
  out.checksum = fnv1a(out.table->raw());
  return out;
}

}  // namespace hdl
