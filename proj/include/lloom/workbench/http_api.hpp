#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include <httplib.h>

#include "lloom/core/types.hpp"
#include "lloom/workbench/service.hpp"

namespace lloom {

/// HTTP status and {"error": {code, message[, position]}} body for an exception.
std::pair<int, json> error_response(const std::exception& e);

/// Mounts the /api routes and, when given, the static UI bundle at "/".
void register_routes(httplib::Server& server, WorkbenchService& service,
                     const std::optional<std::filesystem::path>& static_dir = std::nullopt);

/// Builds a RawTable from a request body: {"csv": "..."}, {"jsonl": "..."},
/// {"rows": [{...}]} or {"path": "file"}.
RawTable table_from_request(const json& body);

} // namespace lloom
