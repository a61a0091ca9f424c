#include "samro/keyvalues.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace samro {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValues KeyValues::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open configuration file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path);
}

KeyValues KeyValues::from_string(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    kv.entries_.emplace(key, Entry{value, false});
  }
  return kv;
}

bool KeyValues::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) {
  const auto n = entries_.count(key);
  if (n == 0) return fallback;
  if (n > 1) throw std::runtime_error(origin_ + ": key repeated: " + key);
  auto it = entries_.find(key);
  it->second.consumed = true;
  return it->second.value;
}

double KeyValues::get_double(const std::string& key, double fallback) {
  const std::string s = get_string(key, "");
  if (s.empty() && !has(key)) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": key `" + key + "` is not a number: " + s);
  }
}

long KeyValues::get_long(const std::string& key, long fallback) {
  const std::string s = get_string(key, "");
  if (s.empty() && !has(key)) return fallback;
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": key `" + key + "` is not an integer: " + s);
  }
}

std::vector<std::vector<std::string>> KeyValues::get_lists(const std::string& key) {
  std::vector<std::vector<std::string>> out;
  auto [begin, end] = entries_.equal_range(key);
  for (auto it = begin; it != end; ++it) {
    it->second.consumed = true;
    std::istringstream ls(it->second.value);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    out.push_back(std::move(tokens));
  }
  return out;
}

void KeyValues::check_all_consumed() const {
  std::string unknown;
  for (const auto& [key, entry] : entries_) {
    if (!entry.consumed) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) {
    throw std::runtime_error(origin_ + ": unknown configuration keys: " + unknown);
  }
}

}  // namespace samro
