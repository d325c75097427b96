#include "fastpol/output.hpp"

#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include "fastpol/errors.hpp"

namespace fastpol {

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!std::filesystem::exists(dir_, ec)) {
    created_dir_ = std::filesystem::create_directories(dir_, ec);
    if (ec) throw SimulationError(fmt::format("cannot create {}: {}", dir_.string(), ec.message()));
  } else if (!std::filesystem::is_directory(dir_, ec)) {
    throw SimulationError(dir_.string() + " exists and is not a directory");
  }
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& p : written_) std::filesystem::remove(p, ec);
  if (created_dir_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
}

void OutputSet::put(const std::string& name, std::string_view contents) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimulationError("cannot write " + path.string());
  written_.push_back(path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw SimulationError("short write to " + path.string());
}

const OutputFile& OutputSet::write(const std::string& name, std::string_view contents) {
  put(name, contents);
  files_.push_back({name, contents.size(), fnv1a64_hex(contents)});
  return files_.back();
}

void OutputSet::write_unlisted(const std::string& name, std::string_view contents) {
  put(name, contents);
}

}  // namespace fastpol
