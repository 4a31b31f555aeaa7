#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace seqind {

/// A value fell outside its declared interval, or an index past the end of a
/// finite sequence was requested.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A sequence data file could not be read or parsed.
class LoadError : public std::runtime_error {
public:
    LoadError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line)
    {
    }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A finite-depth procedure ran out of data (too few checkpoints, an exhausted
/// pool, a refinement budget).
class DepthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace seqind
