#include "omnidet/config.hpp"

#include <charconv>
#include <climits>
#include <fstream>
#include <sstream>

namespace omnidet {

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<double> parse_double(std::string_view token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

std::optional<long long> parse_int(std::string_view token) {
    long long value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

KeyValueFile KeyValueFile::parse(std::istream& in, std::string source_name) {
    KeyValueFile kv;
    kv.source_ = std::move(source_name);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(kv.source_ + ":" + std::to_string(line_no) +
                             ": expected key=value, got '" + std::string(view) + "'");
        }
        Entry entry;
        entry.key = std::string(trim(view.substr(0, eq)));
        entry.value = std::string(trim(view.substr(eq + 1)));
        entry.line = line_no;
        if (entry.key.empty()) {
            throw ParseError(kv.source_ + ":" + std::to_string(line_no) + ": empty key");
        }
        kv.entries_.push_back(std::move(entry));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return parse(in, path.string());
}

const KeyValueFile::Entry* KeyValueFile::find(std::string_view key) const {
    const Entry* found = nullptr;
    for (const auto& e : entries_) {
        if (e.key == key) found = &e;
    }
    return found;
}

bool KeyValueFile::has(std::string_view key) const { return find(key) != nullptr; }

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return e->value;
}

std::vector<std::string> KeyValueFile::get_all(std::string_view key) const {
    std::vector<std::string> values;
    for (const auto& e : entries_) {
        if (e.key == key) values.push_back(e.value);
    }
    return values;
}

void KeyValueFile::fail_missing(std::string_view key) const {
    throw ConfigError(source_ + ": missing required key '" + std::string(key) + "'");
}

std::string KeyValueFile::get_string(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) fail_missing(key);
    return e->value;
}

std::string KeyValueFile::get_string(std::string_view key, std::string fallback) const {
    const Entry* e = find(key);
    return e ? e->value : std::move(fallback);
}

double KeyValueFile::get_double(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) fail_missing(key);
    auto value = parse_double(e->value);
    if (!value) {
        throw ParseError(source_ + ":" + std::to_string(e->line) + ": key '" + e->key +
                         "' expects a number, got '" + e->value + "'");
    }
    return *value;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) fail_missing(key);
    auto value = parse_int(e->value);
    if (!value || *value < INT_MIN || *value > INT_MAX) {
        throw ParseError(source_ + ":" + std::to_string(e->line) + ": key '" + e->key +
                         "' expects an integer, got '" + e->value + "'");
    }
    return static_cast<int>(*value);
}

int KeyValueFile::get_int(std::string_view key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueFile::get_uint64(std::string_view key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::uint64_t value = 0;
    const char* first = e->value.data();
    const char* last = e->value.data() + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(source_ + ":" + std::to_string(e->line) + ": key '" + e->key +
                         "' expects a non-negative integer, got '" + e->value + "'");
    }
    return value;
}

void KeyValueFile::require_known_keys(std::initializer_list<std::string_view> known) const {
    for (const auto& e : entries_) {
        bool ok = false;
        for (auto k : known) {
            if (e.key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                              "'");
        }
    }
}

}  // namespace omnidet
