#pragma once

#include <stdexcept>
#include <string>

namespace semcont {

// Error taxonomy behind the CLI exit codes: config 2, data 3, numeric 4.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Correlation on a constant input is undefined; reports render it as "-".
struct constant_input_error : numeric_error {
    explicit constant_input_error(const std::string& msg) : numeric_error(msg) {}
};

}  // namespace semcont
