#pragma once

#include <stdexcept>
#include <string>

namespace nicmap {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed workload, cluster, or placement document. The message starts
/// with the offending field path, e.g. "jobs[2].processes: must be >= 2".
class SchemaError : public Error {
public:
    SchemaError(const std::string& path, const std::string& what);
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ClusterFull : public Error {
public:
    using Error::Error;
};

class CoreAlreadyUsed : public Error {
public:
    using Error::Error;
};

class PatternUndefined : public Error {
public:
    using Error::Error;
};

class UnplacedProcess : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nicmap
