#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace elastodyn {

// Flat key = value configuration with optional [section] headers; keys are
// stored as "section.key" ("" section for keys before any header).  Lines
// starting with '#' or ';' are comments.
class Config {
  public:
    static Config parse_string(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Overrides (e.g. from command-line flags).
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

} // namespace elastodyn
