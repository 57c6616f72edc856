#pragma once

#include <filesystem>
#include <optional>

#include "dimminer/error.hpp"
#include "dimminer/pipeline.hpp"

// Keep after Eigen.
#include <httplib.h>

namespace dimminer {

int http_status(ErrorCode code);

// Registers the session API on `server`. `sessions` must outlive it.
void mount_routes(httplib::Server& server, SessionService& sessions,
                  const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace dimminer
