#include "reca/kvfile.hpp"

#include <charconv>
#include <istream>

namespace reca {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::vector<KvSection> ParseKvStream(std::istream& in) {
  std::vector<KvSection> sections;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    if (size_t hash = sv.find('#'); hash != std::string_view::npos) {
      sv = sv.substr(0, hash);
    }
    sv = Trim(sv);
    if (sv.empty()) continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') throw KvError(line_no, "unterminated section header");
      std::string_view name = Trim(sv.substr(1, sv.size() - 2));
      if (name.empty()) throw KvError(line_no, "empty section name");
      sections.push_back(KvSection{std::string(name), line_no, {}});
      continue;
    }
    size_t eq = sv.find('=');
    if (eq == std::string_view::npos) throw KvError(line_no, "expected key = value");
    std::string_view key = Trim(sv.substr(0, eq));
    std::string_view value = Trim(sv.substr(eq + 1));
    if (key.empty()) throw KvError(line_no, "empty key");
    if (sections.empty()) throw KvError(line_no, "entry before any section");
    sections.back().entries.push_back(KvEntry{std::string(key), std::string(value), line_no});
  }
  return sections;
}

double KvToDouble(const KvEntry& e) {
  try {
    size_t pos = 0;
    double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw KvError(e.line, "bad numeric value for '" + e.key + "': '" + e.value + "'");
  }
}

uint64_t KvToUint(const KvEntry& e) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || p != e.value.data() + e.value.size()) {
    throw KvError(e.line, "bad integer value for '" + e.key + "': '" + e.value + "'");
  }
  return v;
}

bool KvToBool(const KvEntry& e) {
  if (e.value == "0") return false;
  if (e.value == "1") return true;
  throw KvError(e.line, "value for '" + e.key + "' must be 0 or 1");
}

}  // namespace reca
