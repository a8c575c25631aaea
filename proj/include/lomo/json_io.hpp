#pragma once

// JSON encodings. Polygons are arrays of [x, y] pairs in stored (canonical)
// order; scored shapes are objects {"vertices": [...], "score": s}.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lomo/evalproto.hpp"
#include "lomo/geom.hpp"
#include "lomo/sem.hpp"

namespace lomo::json_io {

using nlohmann::json;

json to_json(std::span<const geom::Point> pts);
json to_json(const geom::ArbPolygon& poly);
json to_json(const geom::Quadrangle& quad);
json to_json(const geom::Proposal& p);
json to_json(const evalproto::ScoredPolygon& p);
json to_json(const sem::Reconstruction& r);
json to_json(const evalproto::MatchReport& r);

std::vector<geom::Point> points_from_json(const json& j);
geom::ArbPolygon polygon_from_json(const json& j);
geom::Quadrangle quad_from_json(const json& j);
geom::Proposal proposal_from_json(const json& j);
/// Accepts either a bare vertex array (score 1) or {"vertices", "score"}.
evalproto::ScoredPolygon scored_polygon_from_json(const json& j);
evalproto::MatchReport report_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace lomo::json_io
