#include <cmath>

#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"

namespace sdk::ingest {

namespace {

using nlohmann::json;

geo::GeoPoint position(const std::string& path, std::size_t index, const json& coord) {
  if (!coord.is_array() || coord.size() < 2 || !coord[0].is_number() || !coord[1].is_number()) {
    throw ParseError(path, index + 1, 1,
                     "feature " + std::to_string(index) + ": bad coordinate (expected [lon, lat])");
  }
  const double lon = coord[0].get<double>();
  const double lat = coord[1].get<double>();
  if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    throw ValidationError(
        {"feature " + std::to_string(index) + ": coordinate outside WGS84 bounds"});
  }
  return {lat, lon};
}

}  // namespace

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kPolygonValue:
      return "polygon_value";
    case SourceKind::kPoint:
      return "point";
    case SourceKind::kLine:
      return "line";
  }
  return "point";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "polygon_value") return SourceKind::kPolygonValue;
  if (s == "point") return SourceKind::kPoint;
  if (s == "line") return SourceKind::kLine;
  throw ValidationError({"unknown source kind '" + s + "' (expected polygon_value|point|line)"});
}

std::string to_string(Allocation a) {
  return a == Allocation::kIntensive ? "intensive" : "extensive";
}

Allocation allocation_from_string(const std::string& s) {
  if (s == "intensive") return Allocation::kIntensive;
  if (s == "extensive") return Allocation::kExtensive;
  throw ValidationError({"unknown allocation '" + s + "' (expected intensive|extensive)"});
}

FeatureSource parse_feature_source(const std::string& path, SourceKind kind,
                                   const std::string& name, Allocation allocation) {
  const json root = json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    throw ParseError(path, 1, 1, "invalid JSON");
  }
  if (root.value("type", "") != "FeatureCollection" || !root.contains("features") ||
      !root["features"].is_array()) {
    throw ParseError(path, 1, 1, "expected a GeoJSON FeatureCollection");
  }

  FeatureSource source;
  source.kind = kind;
  source.name = name;
  source.allocation = allocation;

  const json& features = root["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& feature = features[i];
    if (!feature.contains("geometry") || feature["geometry"].is_null()) {
      throw ParseError(path, i + 1, 1, "feature " + std::to_string(i) + ": missing geometry");
    }
    const json& geom = feature["geometry"];
    const std::string type = geom.value("type", "");
    if (type.rfind("Multi", 0) == 0 || type == "GeometryCollection") {
      throw UnsupportedGeometry("feature " + std::to_string(i) + ": " + type +
                                " is not supported");
    }
    const json& coords = geom.contains("coordinates") ? geom["coordinates"] : json();

    switch (kind) {
      case SourceKind::kPoint: {
        if (type != "Point") {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": expected Point, got " + type);
        }
        source.points.push_back(position(path, i, coords));
        break;
      }
      case SourceKind::kLine: {
        if (type != "LineString") {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": expected LineString, got " + type);
        }
        if (!coords.is_array() || coords.size() < 2) {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": LineString needs >= 2 vertices");
        }
        std::vector<geo::GeoPoint> line;
        line.reserve(coords.size());
        for (const auto& c : coords) {
          line.push_back(position(path, i, c));
        }
        source.lines.push_back(std::move(line));
        break;
      }
      case SourceKind::kPolygonValue: {
        if (type != "Polygon") {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": expected Polygon, got " + type);
        }
        if (!coords.is_array() || coords.empty()) {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": Polygon needs coordinates");
        }
        if (coords.size() > 1) {
          throw UnsupportedGeometry("feature " + std::to_string(i) +
                                    ": polygons with holes are not supported");
        }
        const json& ring = coords[0];
        if (!ring.is_array() || ring.size() < 4) {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": ring needs >= 4 positions");
        }
        FeatureSource::ValuedPolygon poly;
        poly.ring.reserve(ring.size() - 1);
        for (const auto& c : ring) {
          poly.ring.push_back(position(path, i, c));
        }
        if (!(poly.ring.front() == poly.ring.back())) {
          throw ParseError(path, i + 1, 1, "feature " + std::to_string(i) + ": ring not closed");
        }
        poly.ring.pop_back();  // drop the repeated closing vertex

        if (!feature.contains("properties") || !feature["properties"].is_object() ||
            !feature["properties"].contains("value") ||
            !feature["properties"]["value"].is_number()) {
          throw ParseError(path, i + 1, 1,
                           "feature " + std::to_string(i) + ": missing numeric property 'value'");
        }
        poly.value = feature["properties"]["value"].get<double>();
        if (!std::isfinite(poly.value)) {
          throw ValidationError({"feature " + std::to_string(i) + ": non-finite value"});
        }
        if (allocation == Allocation::kExtensive && poly.value < 0.0) {
          throw ValidationError({"feature " + std::to_string(i) + ": extensive value must be >= 0"});
        }
        source.polygons.push_back(std::move(poly));
        break;
      }
    }
  }
  return source;
}

void write_feature_source(const FeatureSource& source, const std::string& path) {
  json features = json::array();
  const auto coord = [](const geo::GeoPoint& p) { return json::array({p.lon, p.lat}); };

  switch (source.kind) {
    case SourceKind::kPoint:
      for (const auto& p : source.points) {
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", coord(p)}}},
                            {"properties", json::object()}});
      }
      break;
    case SourceKind::kLine:
      for (const auto& line : source.lines) {
        json coords = json::array();
        for (const auto& p : line) {
          coords.push_back(coord(p));
        }
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                            {"properties", json::object()}});
      }
      break;
    case SourceKind::kPolygonValue:
      for (const auto& poly : source.polygons) {
        json ring = json::array();
        for (const auto& p : poly.ring) {
          ring.push_back(coord(p));
        }
        ring.push_back(coord(poly.ring.front()));  // close
        features.push_back(
            {{"type", "Feature"},
             {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
             {"properties", {{"value", poly.value}}}});
      }
      break;
  }

  json root{{"type", "FeatureCollection"}, {"name", source.name}, {"features", features}};
  write_text_file(path, root.dump(2) + "\n");
}

}  // namespace sdk::ingest
