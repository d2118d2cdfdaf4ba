#pragma once

#include <stdexcept>
#include <string>

namespace chatdrift {

// Every failure the library reports, grouped by the exit-code class the CLI
// maps them to: config (2), data (3), training (4), mismatch (5).
enum class Errc {
    // config
    bad_spec,
    config_error,
    // data
    io_error,
    missing_column,
    bad_field,
    duplicate_id,
    non_contiguous_seq,
    bad_size,
    bad_fraction,
    unknown_book,
    empty_corpus,
    corrupt_file,
    version_mismatch,
    unknown_label,
    length_mismatch,
    empty_matrix,
    too_few_examples,
    missing_stats,
    // training / scoring
    empty_training,
    negative_feature,
    dim_mismatch,
    single_class,
    non_finite,
    // model/task mismatch
    task_mismatch,
};

enum class ErrorClass { config, data, training, mismatch };

constexpr ErrorClass error_class(Errc c) {
    switch (c) {
        case Errc::bad_spec:
        case Errc::config_error:
            return ErrorClass::config;
        case Errc::empty_training:
        case Errc::negative_feature:
        case Errc::dim_mismatch:
        case Errc::single_class:
        case Errc::non_finite:
            return ErrorClass::training;
        case Errc::task_mismatch:
            return ErrorClass::mismatch;
        default:
            return ErrorClass::data;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    Errc code() const noexcept { return code_; }
    ErrorClass cls() const noexcept { return error_class(code_); }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace chatdrift
