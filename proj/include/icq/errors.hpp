#pragma once

#include <stdexcept>
#include <string>

namespace icq {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   validation_error -> caller passed inconsistent arguments or config (exit 2)
//   parse_error      -> a file is structurally malformed (exit 3)
//   corruption_error -> a file parses but its contents are internally
//                       inconsistent (bad checksum, impossible stream) (exit 3)
//   io_error         -> the operating system failed us (exit 4)
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class validation_error : public error {
public:
    using error::error;
};

class parse_error : public error {
public:
    using error::error;
};

class corruption_error : public parse_error {
public:
    using parse_error::parse_error;
};

class io_error : public error {
public:
    using error::error;
};

} // namespace icq
