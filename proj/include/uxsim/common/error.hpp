// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace uxsim {

// Root of the project's exception hierarchy. Every module throws a subclass
// so callers (CLI, HTTP service) can map failures to exit codes and statuses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define UXSIM_DEFINE_ERROR(Name)              \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

UXSIM_DEFINE_ERROR(ConfigError);
UXSIM_DEFINE_ERROR(ParseError);
UXSIM_DEFINE_ERROR(ValidationError);
UXSIM_DEFINE_ERROR(ProviderError);
UXSIM_DEFINE_ERROR(EnvironmentError);
UXSIM_DEFINE_ERROR(ActionError);
UXSIM_DEFINE_ERROR(AnnotationError);
UXSIM_DEFINE_ERROR(SelectorError);
UXSIM_DEFINE_ERROR(PatchError);
UXSIM_DEFINE_ERROR(EditError);
UXSIM_DEFINE_ERROR(PreviewError);
UXSIM_DEFINE_ERROR(StorageError);
UXSIM_DEFINE_ERROR(IntegrityError);
UXSIM_DEFINE_ERROR(QueryError);
UXSIM_DEFINE_ERROR(DependencyError);
UXSIM_DEFINE_ERROR(NotFoundError);
UXSIM_DEFINE_ERROR(ConflictError);

// Transport failures are the only retryable class.
class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

#undef UXSIM_DEFINE_ERROR

}  // namespace uxsim
