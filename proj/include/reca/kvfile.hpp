#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace reca {

/// Sectioned key=value text format shared by the characteristics table and
/// the run configuration file. `#` starts a comment, sections are
/// `[section name]` lines, entries are `key = value`.
struct KvEntry {
  std::string key;
  std::string value;
  size_t line = 0;
};

struct KvSection {
  std::string name;
  size_t line = 0;
  std::vector<KvEntry> entries;
};

class KvError : public std::runtime_error {
 public:
  KvError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

std::vector<KvSection> ParseKvStream(std::istream& in);

double KvToDouble(const KvEntry& e);
uint64_t KvToUint(const KvEntry& e);
bool KvToBool(const KvEntry& e);  // accepts 0|1

}  // namespace reca
