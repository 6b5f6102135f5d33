#pragma once

#include <stdexcept>
#include <string>

namespace subvocab {

// Error taxonomy shared by the library and the CLI. The CLI maps each class
// to a distinct process exit code (see exit_code()).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 1; }
};

// Bad configuration: unknown block name, non-positive hardware parameter,
// out-of-range tau, missing required flag combinations.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

// Malformed input data: unparseable JSON/JSONL, bad weight-file header,
// text that the tokenizer cannot encode.
class ParseError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

// Violated invariants between otherwise well-formed artifacts: token id out
// of range, merge referencing an unknown token, mismatched vocabularies.
class IntegrityError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
};

} // namespace subvocab
