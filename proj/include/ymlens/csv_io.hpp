#ifndef YMLENS_CSV_IO_HPP
#define YMLENS_CSV_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ymlens/wong_dynamics.hpp"

namespace ymlens {

// 17 significant digits; round-trips doubles exactly.
std::string format_double(double x);

// Buffered text file written atomically (tmp + rename).
class AtomicFile {
 public:
  explicit AtomicFile(std::string path) : path_(std::move(path)) {}

  AtomicFile& line(const std::string& s) {
    buffer_ += s;
    buffer_ += '\n';
    return *this;
  }
  AtomicFile& comment(const std::string& key, const std::string& value) {
    return line("# " + key + " " + value);
  }
  void write();

 private:
  std::string path_;
  std::string buffer_;
};

std::string csv_join(const std::vector<std::string>& cells);

struct LensTableFile {
  int schema_version = 1;
  std::string config_hash;
  int n = 0, d = 0;
  std::vector<LensDatum> rows;
};

void write_lens_table(const std::string& path, const LensTableFile& table);
LensTableFile read_lens_table(const std::string& path);

}  // namespace ymlens

#endif
