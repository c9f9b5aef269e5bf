#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omnidet/errors.hpp"

namespace omnidet {

/// Parsed key=value file. '#' starts a comment, blank lines are skipped,
/// keys may repeat (order preserved). All lookups report "<source>:<line>"
/// on failure so config mistakes point at the offending line.
class KeyValueFile {
  public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };

    static KeyValueFile parse(std::istream& in, std::string source_name);
    static KeyValueFile load(const std::filesystem::path& path);

    const std::string& source() const { return source_; }
    const std::vector<Entry>& entries() const { return entries_; }

    bool has(std::string_view key) const;
    /// Last occurrence wins when a key repeats.
    std::optional<std::string> get(std::string_view key) const;
    /// All occurrences, in file order.
    std::vector<std::string> get_all(std::string_view key) const;

    std::string get_string(std::string_view key) const;
    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key) const;
    double get_double(std::string_view key, double fallback) const;
    int get_int(std::string_view key) const;
    int get_int(std::string_view key, int fallback) const;
    std::uint64_t get_uint64(std::string_view key, std::uint64_t fallback) const;

    /// Unknown keys are config errors; call after all expected keys are listed.
    void require_known_keys(std::initializer_list<std::string_view> known) const;

  private:
    const Entry* find(std::string_view key) const;
    [[noreturn]] void fail_missing(std::string_view key) const;

    std::string source_;
    std::vector<Entry> entries_;
};

/// Locale-independent number parsing ('.' decimal separator, full-token match).
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

}  // namespace omnidet
