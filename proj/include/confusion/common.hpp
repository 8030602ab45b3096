#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace confusion {

// Malformed user input: unreadable files, missing columns, out-of-range
// values. The CLI maps this to exit code 2; anything else exits 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t state = 0xcbf29ce484222325ull);

std::string to_hex(std::uint64_t v);

// Shortest decimal form that round-trips the exact double. Keeps every
// emitted CSV/JSON byte-stable across reruns.
std::string format_double(double v);

std::string lower_ascii(std::string_view s);
std::string trim(std::string_view s);

} // namespace confusion
