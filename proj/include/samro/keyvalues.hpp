#pragma once

#include <map>
#include <string>
#include <vector>

namespace samro {

/// Plain-text configuration: one `key = value...` per line, `#` comments,
/// repeated keys allowed for list-valued settings. Consumers mark keys as
/// they read them; anything left unread is reported as an error so typos do
/// not silently fall back to defaults.
class KeyValues {
 public:
  static KeyValues from_file(const std::string& path);
  static KeyValues from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  /// Single-valued keys; throws if repeated.
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long get_long(const std::string& key, long fallback);
  /// All occurrences of a repeated key, each tokenized on whitespace.
  std::vector<std::vector<std::string>> get_lists(const std::string& key);

  /// Throws if any key was never consumed.
  void check_all_consumed() const;

 private:
  struct Entry {
    std::string value;
    bool consumed = false;
  };
  std::string origin_;
  std::multimap<std::string, Entry> entries_;
};

}  // namespace samro
