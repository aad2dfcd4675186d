#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace airsync
{

/// Base for every domain error raised by the simulator.
class SimError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct PastEvent : SimError { using SimError::SimError; };
struct Overflow : SimError { using SimError::SimError; };
struct InsufficientSamples : SimError { using SimError::SimError; };
struct NegativeTaState : SimError { using SimError::SimError; };
struct NoTaState : SimError { using SimError::SimError; };
struct CausalityViolation : SimError { using SimError::SimError; };
struct MissingHelper : SimError { using SimError::SimError; };
struct GwNotSynced : SimError { using SimError::SimError; };
struct InvalidGeometry : SimError { using SimError::SimError; };
struct InsufficientNodes : SimError { using SimError::SimError; };

/// Configuration rejected; `path()` names the offending field (e.g. "nodes[2].attach").
class InvalidConfig : public SimError
{
public:
    InvalidConfig(std::string path, const std::string& message)
        : SimError(path + ": " + message), path_(std::move(path)), message_(message)
    {
    }

    const std::string& path() const { return path_; }
    const std::string& message() const { return message_; }

private:
    std::string path_;
    std::string message_;
};

} // namespace airsync
