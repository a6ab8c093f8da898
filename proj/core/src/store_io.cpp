#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <regex>

#include <json.hpp>
#include <unistd.h>

#include "snapshot_builder.hpp"
#include "wxrec/error.hpp"
#include "wxrec/store.hpp"

namespace wxrec::store {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr char kColumnMagic[6] = {'W', 'X', 'C', 'O', 'L', '1'};

bool safe_file_stem(const std::string& name) {
  if (name.empty() || name.front() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string version_dir_name(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%06llu", static_cast<unsigned long long>(v));
  return buf;
}

template <class T>
void put_le(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (pos + sizeof(T) > in.size()) throw Error(Errc::snapshot_io, "column file truncated");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return std::bit_cast<T>(u);
}

std::string encode_column(const Column& col) {
  std::string out(kColumnMagic, sizeof kColumnMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(col.cells.size()));
  for (const auto& cell : col.cells) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cell.days.size()));
    for (std::size_t k = 0; k < cell.days.size(); ++k) {
      put_le<std::int64_t>(out, cell.days[k]);
      put_le<float>(out, cell.values[k]);
    }
  }
  return out;
}

std::vector<CellData> decode_column(const std::string& bytes, std::size_t expected_cells) {
  if (bytes.size() < sizeof kColumnMagic ||
      bytes.compare(0, sizeof kColumnMagic, kColumnMagic, sizeof kColumnMagic) != 0) {
    throw Error(Errc::snapshot_io, "bad column file magic");
  }
  std::size_t pos = sizeof kColumnMagic;
  const auto n = get_le<std::uint32_t>(bytes, pos);
  if (n != expected_cells) throw Error(Errc::snapshot_io, "column cell count disagrees with axes");
  std::vector<CellData> cells(n);
  for (auto& cell : cells) {
    const auto m = get_le<std::uint32_t>(bytes, pos);
    if (static_cast<std::uint64_t>(m) * 12 > bytes.size() - pos) {
      throw Error(Errc::snapshot_io, "column file truncated");
    }
    cell.days.reserve(m);
    cell.values.reserve(m);
    for (std::uint32_t k = 0; k < m; ++k) {
      cell.days.push_back(get_le<std::int64_t>(bytes, pos));
      cell.values.push_back(get_le<float>(bytes, pos));
      if (k > 0 && cell.days[k] <= cell.days[k - 1]) {
        throw Error(Errc::snapshot_io, "column days not increasing");
      }
    }
  }
  if (pos != bytes.size()) throw Error(Errc::snapshot_io, "trailing bytes in column file");
  return cells;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::snapshot_io, "cannot open " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::snapshot_io, "cannot write " + p.string());
}

}  // namespace

fs::path save_snapshot(const StoreSnapshot& s, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(Errc::snapshot_io, "cannot create " + root.string());

  const fs::path final_dir = root / version_dir_name(s.version());
  if (fs::exists(final_dir)) {
    throw Error(Errc::snapshot_io, "snapshot " + final_dir.string() + " already exists");
  }
  const fs::path tmp = root / (".tmp-" + version_dir_name(s.version()) + "-" + std::to_string(::getpid()));
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  json manifest;
  manifest["format"] = "wxrec-snapshot";
  manifest["version"] = s.version();
  manifest["lats"] = s.lats();
  manifest["lons"] = s.lons();
  manifest["variables"] = json::array();
  for (const auto& info : s.variables()) {
    if (!safe_file_stem(info.name)) {
      fs::remove_all(tmp, ec);
      throw Error(Errc::snapshot_io, "variable name '" + info.name + "' is not file-safe");
    }
    manifest["variables"].push_back(
        {{"name", info.name}, {"kind", std::string(nc::to_string(info.kind))}, {"units", info.units}});
    write_file(tmp / (info.name + ".col"), encode_column(s.column(info.name)));
  }
  manifest["provenance"] = json::array();
  for (const auto& p : s.provenance()) {
    manifest["provenance"].push_back(
        {{"source", p.source}, {"observations", p.observations}, {"replaced", p.replaced}});
  }
  write_file(tmp / "manifest.json", manifest.dump(2) + "\n");

  fs::rename(tmp, final_dir, ec);
  if (ec) {
    fs::remove_all(tmp, ec);
    throw Error(Errc::snapshot_io, "cannot publish " + final_dir.string());
  }
  return final_dir;
}

SnapshotPtr load_snapshot(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
    SnapshotBuilder b;
    b.set_version(manifest.at("version").get<std::uint64_t>());
    b.set_axes(manifest.at("lats").get<std::vector<double>>(),
               manifest.at("lons").get<std::vector<double>>());
    const std::size_t ncells = b.peek().cell_count();
    for (const auto& v : manifest.at("variables")) {
      auto col = std::make_shared<Column>();
      col->info.name = v.at("name").get<std::string>();
      if (!safe_file_stem(col->info.name)) throw Error(Errc::snapshot_io, "unsafe variable name");
      auto kind = nc::parse_kind(v.at("kind").get<std::string>());
      if (!kind) throw Error(Errc::snapshot_io, "unknown variable kind");
      col->info.kind = *kind;
      col->info.units = v.value("units", "");
      col->cells = decode_column(read_file(dir / (col->info.name + ".col")), ncells);
      const std::string name = col->info.name;
      b.set_column(name, std::move(col));
    }
    for (const auto& p : manifest.value("provenance", json::array())) {
      b.add_provenance({p.at("source").get<std::string>(), p.value("observations", std::uint64_t{0}),
                        p.value("replaced", std::uint64_t{0})});
    }
    return b.finish();
  } catch (const json::exception& e) {
    throw Error(Errc::snapshot_io, "bad manifest in " + dir.string() + ": " + e.what());
  }
}

SnapshotPtr load_latest(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) return StoreSnapshot::empty();
  static const std::regex pattern("v([0-9]+)");
  std::uint64_t best = 0;
  fs::path best_dir;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || !std::regex_match(name, m, pattern)) continue;
    const auto v = std::stoull(m[1].str());
    if (v > best && fs::exists(entry.path() / "manifest.json")) {
      best = v;
      best_dir = entry.path();
    }
  }
  if (best_dir.empty()) return StoreSnapshot::empty();
  return load_snapshot(best_dir);
}

}  // namespace wxrec::store
