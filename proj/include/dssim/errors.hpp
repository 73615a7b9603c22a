#pragma once

#include <stdexcept>
#include <string>

namespace dssim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input files, flags or model data. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnsupportedTask : public Error {
public:
    using Error::Error;
};

// The event queue drained while tasks were still unfinished. Exit code 3.
class DeadlockError : public Error {
public:
    using Error::Error;
};

// A scheduler returned an assignment that breaks the interface contract.
class SchedulerContractError : public Error {
public:
    using Error::Error;
};

class MissingTableEntry : public Error {
public:
    using Error::Error;
};

class OracleTooLarge : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dssim
