#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fastpol {

struct OutputFile {
  std::string name;
  std::uintmax_t bytes = 0;
  std::string fnv1a64;  ///< hex content hash
};

/// 64-bit FNV-1a of `data` as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view data);

/// Files written into one output directory. Unless commit() is called, the
/// destructor removes every file written through this object (and the
/// directory, if it created it and it is left empty).
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  ~OutputSet();

  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  const std::filesystem::path& dir() const { return dir_; }

  /// Writes `contents` to dir/name and records it in the inventory.
  const OutputFile& write(const std::string& name, std::string_view contents);

  /// Same as write() but not listed in files(); used for the manifest.
  void write_unlisted(const std::string& name, std::string_view contents);

  const std::vector<OutputFile>& files() const { return files_; }

  void commit() { committed_ = true; }

 private:
  void put(const std::string& name, std::string_view contents);

  std::filesystem::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<OutputFile> files_;
  std::vector<std::filesystem::path> written_;
};

}  // namespace fastpol
