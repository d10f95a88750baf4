#pragma once

// JSON conversions shared by the file formats, the HTTP service and the C API.
// Kept out of the public headers so callers do not inherit nlohmann/json.

#include "json.hpp"
#include "prockit/corpus.hpp"

namespace prockit {

using Json = nlohmann::json;

Json article_to_json(const Article& article);

// Accepts the canonical corpus form and the looser record input form (steps
// as plain text blocks, missing ids, a top-level "steps" shorthand).
Article article_from_json(const Json& record);

}  // namespace prockit
