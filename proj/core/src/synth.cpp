#include "sdk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sdk/cell_series.hpp"
#include "sdk/demand.hpp"
#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"
#include "sdk/propagation.hpp"
#include "sdk/rng.hpp"

namespace sdk::synth {

namespace {

namespace fs = std::filesystem;
using geo::CellId;
using geo::GridSpec;
using geo::ProjectedPoint;
using ingest::FeatureSource;
using propagation::SiteRecord;

constexpr double kTargetFloor = 0.5;
constexpr double kBeta0 = 8.0;

double vec_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (const double x : v) {
    sum += x;
  }
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double vec_variance(const std::vector<double>& v) {
  const double m = vec_mean(v);
  double ss = 0.0;
  for (const double x : v) {
    ss += (x - m) * (x - m);
  }
  return v.empty() ? 0.0 : ss / static_cast<double>(v.size());
}

std::size_t cell_index(CellId c, const GridSpec& grid) {
  return static_cast<std::size_t>(c.row) * grid.n_cols + c.col;
}

CellId cell_at(std::size_t index, const GridSpec& grid) {
  return {static_cast<std::int32_t>(index % grid.n_cols),
          static_cast<std::int32_t>(index / grid.n_cols)};
}

/// Smooth field in [0, 1] sampled at cell centers: a sum of seeded Gaussian
/// bumps, max-normalized.
std::vector<double> bump_field(const GridSpec& grid, std::size_t n_bumps, Rng& rng) {
  const double extent_x = grid.n_cols * grid.cell_size_m;
  const double extent_y = grid.n_rows * grid.cell_size_m;
  struct Bump {
    double cx, cy, sigma, amp;
  };
  std::vector<Bump> bumps(n_bumps);
  for (auto& b : bumps) {
    b.cx = rng.uniform(0.0, extent_x);
    b.cy = rng.uniform(0.0, extent_y);
    b.sigma = rng.uniform(0.10, 0.25) * std::max(extent_x, extent_y);
    b.amp = rng.uniform(0.5, 1.0);
  }
  const std::size_t n = static_cast<std::size_t>(grid.cell_count());
  std::vector<double> field(n, 0.0);
  double max_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ProjectedPoint c = geo::cell_center(cell_at(i, grid), grid);
    double v = 0.0;
    for (const auto& b : bumps) {
      const double dx = c.x - b.cx;
      const double dy = c.y - b.cy;
      v += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
    }
    field[i] = v;
    max_v = std::max(max_v, v);
  }
  if (max_v > 0.0) {
    for (double& v : field) {
      v /= max_v;
    }
  }
  return field;
}

/// Interior point of a cell with a safety margin from the edges.
geo::GeoPoint interior_point(CellId c, const GridSpec& grid, Rng& rng, double margin_m = 15.0) {
  const double cs = grid.cell_size_m;
  const double x = grid.origin.x + c.col * cs + margin_m + rng.uniform() * (cs - 2.0 * margin_m);
  const double y = grid.origin.y + c.row * cs + margin_m + rng.uniform() * (cs - 2.0 * margin_m);
  return geo::unproject({x, y}, grid.projection_origin);
}

/// Axis-aligned rectangle ring (CCW, not closed) in geographic coordinates.
std::vector<geo::GeoPoint> rect_ring(double x0, double y0, double x1, double y1,
                                     const GridSpec& grid) {
  return {geo::unproject({x0, y0}, grid.projection_origin),
          geo::unproject({x1, y0}, grid.projection_origin),
          geo::unproject({x1, y1}, grid.projection_origin),
          geo::unproject({x0, y1}, grid.projection_origin)};
}

struct LayerOutput {
  FeatureSource source;
  std::vector<double> cell_values;  // what rasterization will produce per cell
};

/// Point layer: Poisson counts per cell with the given rate field.
LayerOutput point_layer(const std::string& name, const std::vector<double>& rate,
                        const GridSpec& grid, Rng& rng) {
  LayerOutput out;
  out.source.kind = ingest::SourceKind::kPoint;
  out.source.name = name;
  out.cell_values.assign(rate.size(), 0.0);
  for (std::size_t i = 0; i < rate.size(); ++i) {
    const std::uint64_t k = rng.poisson(rate[i]);
    out.cell_values[i] = static_cast<double>(k);
    for (std::uint64_t j = 0; j < k; ++j) {
      out.source.points.push_back(interior_point(cell_at(i, grid), grid, rng));
    }
  }
  return out;
}

/// Line layer: horizontal in-cell segments summing exactly to the requested
/// per-cell length (meters).
LayerOutput line_layer(const std::string& name, const std::vector<double>& length_m,
                       const GridSpec& grid, Rng& rng) {
  LayerOutput out;
  out.source.kind = ingest::SourceKind::kLine;
  out.source.name = name;
  out.cell_values = length_m;
  const double cs = grid.cell_size_m;
  const double margin = 20.0;
  const double max_seg = cs - 2.0 * margin;
  for (std::size_t i = 0; i < length_m.size(); ++i) {
    double remaining = length_m[i];
    const CellId c = cell_at(i, grid);
    const double x0 = grid.origin.x + c.col * cs;
    const double y0 = grid.origin.y + c.row * cs;
    while (remaining > 0.0) {
      const double seg = std::min(remaining, max_seg);
      const double sx = x0 + margin + rng.uniform() * (max_seg - seg);
      const double sy = y0 + margin + rng.uniform() * (cs - 2.0 * margin);
      out.source.lines.push_back({geo::unproject({sx, sy}, grid.projection_origin),
                                  geo::unproject({sx + seg, sy}, grid.projection_origin)});
      remaining -= seg;
    }
  }
  return out;
}

/// Extensive polygon layer: one inset rectangle per cell carrying the value.
LayerOutput cell_polygon_layer(const std::string& name, const std::vector<double>& value,
                               const GridSpec& grid) {
  LayerOutput out;
  out.source.kind = ingest::SourceKind::kPolygonValue;
  out.source.name = name;
  out.source.allocation = ingest::Allocation::kExtensive;
  out.cell_values = value;
  const double cs = grid.cell_size_m;
  const double inset = 2.0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] <= 0.0) {
      continue;  // nothing to emit; rasterization reads absent as 0
    }
    const CellId c = cell_at(i, grid);
    const double x0 = grid.origin.x + c.col * cs;
    const double y0 = grid.origin.y + c.row * cs;
    FeatureSource::ValuedPolygon poly;
    poly.ring = rect_ring(x0 + inset, y0 + inset, x0 + cs - inset, y0 + cs - inset, grid);
    poly.value = value[i];
    out.source.polygons.push_back(std::move(poly));
  }
  return out;
}

/// Intensive polygon layer on 2x2-cell blocks; per-cell value equals the
/// block value (blocks are axis-aligned and cover whole cells).
LayerOutput block_intensive_layer(const std::string& name, const std::vector<double>& field,
                                  const GridSpec& grid,
                                  const std::function<double(double)>& value_of) {
  LayerOutput out;
  out.source.kind = ingest::SourceKind::kPolygonValue;
  out.source.name = name;
  out.source.allocation = ingest::Allocation::kIntensive;
  out.cell_values.assign(field.size(), 0.0);
  const double cs = grid.cell_size_m;
  const double inset = 2.0;
  for (std::int32_t br = 0; br < grid.n_rows; br += 2) {
    for (std::int32_t bc = 0; bc < grid.n_cols; bc += 2) {
      const std::int32_t c1 = std::min(bc + 2, grid.n_cols);
      const std::int32_t r1 = std::min(br + 2, grid.n_rows);
      double mean_field = 0.0;
      std::size_t count = 0;
      for (std::int32_t row = br; row < r1; ++row) {
        for (std::int32_t col = bc; col < c1; ++col) {
          mean_field += field[cell_index({col, row}, grid)];
          ++count;
        }
      }
      mean_field /= static_cast<double>(count);
      const double v = value_of(mean_field);
      for (std::int32_t row = br; row < r1; ++row) {
        for (std::int32_t col = bc; col < c1; ++col) {
          out.cell_values[cell_index({col, row}, grid)] = v;
        }
      }
      FeatureSource::ValuedPolygon poly;
      poly.ring = rect_ring(grid.origin.x + bc * cs + inset, grid.origin.y + br * cs + inset,
                            grid.origin.x + c1 * cs - inset, grid.origin.y + r1 * cs - inset, grid);
      poly.value = v;
      out.source.polygons.push_back(std::move(poly));
    }
  }
  return out;
}

std::vector<double> mix(const std::vector<double>& a, const std::vector<double>& u, double w) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = w * a[i] + (1.0 - w) * u[i];
  }
  return out;
}

nlohmann::json transform_to_json(const Transform& t) {
  return {{"kind", t.kind}, {"scale", t.scale}, {"param", t.param}};
}

Transform transform_from_json(const nlohmann::json& j) {
  Transform t;
  t.kind = j.at("kind").get<std::string>();
  t.scale = j.at("scale").get<double>();
  t.param = j.value("param", 0.0);
  return t;
}

}  // namespace

double Transform::apply(double f) const {
  const double u = f / scale;
  if (kind == "hinge") {
    return std::max(u - param, 0.0);
  }
  if (kind == "sat") {
    return std::min(u, param);
  }
  if (kind == "pow") {
    return std::pow(std::max(u, 0.0), param);
  }
  if (kind == "sqrt") {
    return std::sqrt(std::max(u, 0.0));
  }
  if (kind == "log1p") {
    return std::log1p(std::max(u, 0.0));
  }
  throw ValidationError({"unknown transform kind '" + kind + "'"});
}

void Truth::save(const std::string& path) const {
  nlohmann::json betas_j;
  for (const auto& [name, beta] : betas) {
    betas_j[name] = beta;
  }
  nlohmann::json transforms_j;
  for (const auto& [name, t] : transforms) {
    transforms_j[name] = transform_to_json(t);
  }
  nlohmann::json j{{"seed", seed},
                   {"rho_target", rho_target},
                   {"beta0", beta0},
                   {"feature_names", feature_names},
                   {"relevant_features", relevant_features},
                   {"betas", betas_j},
                   {"transforms", transforms_j},
                   {"indicator_scale", indicator_scale},
                   {"indicator_offset", indicator_offset},
                   {"sigma_target_noise", sigma_target_noise},
                   {"n_clamped", n_clamped}};
  ingest::write_text_file(path, j.dump(2) + "\n");
}

Truth Truth::load(const std::string& path) {
  const nlohmann::json j =
      nlohmann::json::parse(ingest::read_text_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError(path, 1, 1, "invalid JSON");
  }
  Truth t;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.rho_target = j.at("rho_target").get<double>();
  t.beta0 = j.at("beta0").get<double>();
  t.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  t.relevant_features = j.at("relevant_features").get<std::vector<std::string>>();
  for (const auto& [name, v] : j.at("betas").items()) {
    t.betas[name] = v.get<double>();
  }
  for (const auto& [name, v] : j.at("transforms").items()) {
    t.transforms[name] = transform_from_json(v);
  }
  t.indicator_scale = j.at("indicator_scale").get<double>();
  t.indicator_offset = j.at("indicator_offset").get<double>();
  t.sigma_target_noise = j.at("sigma_target_noise").get<double>();
  t.n_clamped = j.at("n_clamped").get<std::size_t>();
  return t;
}

GenerateResult generate(const CitySpec& spec, const std::string& out_dir) {
  if (spec.rho_target <= 0.0 || spec.rho_target > 1.0) {
    throw ValidationError({"rho_target must be in (0, 1]"});
  }
  if (spec.extent_km * 1000.0 < 10.0 * spec.cell_size_m) {
    throw ValidationError({"extent must span at least 10 cells per side"});
  }

  const geo::GeoPoint bbox_max = geo::unproject(
      {spec.extent_km * 1000.0, spec.extent_km * 1000.0}, spec.origin);
  const GridSpec grid = geo::make_grid(spec.origin, bbox_max, spec.cell_size_m);
  const std::size_t n_cells = static_cast<std::size_t>(grid.cell_count());

  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/features");

  // Latent activity surface and independent per-layer fields.
  Rng surface_rng(derive_seed(spec.seed, "activity-surface"));
  const std::vector<double> activity =
      bump_field(grid, std::max<std::size_t>(2, spec.n_hub_clusters), surface_rng);
  const auto layer_field = [&](const std::string& name) {
    Rng rng(derive_seed(spec.seed, "field-" + name));
    return bump_field(grid, 4, rng);
  };

  // ---- feature layers ------------------------------------------------------
  // Relevant layers load mostly on the activity surface; nuisance layers are
  // dominated by their own independent fields.
  std::vector<LayerOutput> layers;
  std::vector<std::string> layer_names;
  const auto add_layer = [&](LayerOutput layer) {
    layer_names.push_back(layer.source.name);
    layers.push_back(std::move(layer));
  };

  {
    Rng rng(derive_seed(spec.seed, "layer-transport_hubs"));
    const auto g = mix(activity, layer_field("transport_hubs"), 0.5);
    std::vector<double> rate(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      rate[i] = 0.4 + 24.0 * g[i] * g[i];
    }
    add_layer(point_layer("transport_hubs", rate, grid, rng));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-road_length_m"));
    const auto g = mix(activity, layer_field("road_length_m"), 0.55);
    std::vector<double> length(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      length[i] = 350.0 + 3400.0 * g[i];
    }
    add_layer(line_layer("road_length_m", length, grid, rng));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-daytime_population"));
    const auto g = mix(activity, layer_field("daytime_population"), 0.55);
    std::vector<double> value(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      value[i] = std::floor(6000.0 * std::pow(g[i], 1.5) * (1.0 + 0.05 * rng.normal()));
      value[i] = std::max(value[i], 0.0);
    }
    add_layer(cell_polygon_layer("daytime_population", value, grid));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-poi_count"));
    const auto g = mix(activity, layer_field("poi_count"), 0.5);
    std::vector<double> rate(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      rate[i] = 1.0 + 40.0 * g[i] * g[i];
    }
    add_layer(point_layer("poi_count", rate, grid, rng));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-building_area_m2"));
    const auto g = mix(activity, layer_field("building_area_m2"), 0.5);
    std::vector<double> value(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      value[i] = std::floor(250000.0 * std::pow(g[i], 1.3) * (1.0 + 0.05 * rng.normal()));
      value[i] = std::max(value[i], 0.0);
    }
    add_layer(cell_polygon_layer("building_area_m2", value, grid));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-nighttime_population"));
    const auto g = mix(activity, layer_field("nighttime_population"), 0.15);
    std::vector<double> value(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      value[i] = std::max(std::floor(5000.0 * std::pow(g[i], 1.2) * (1.0 + 0.05 * rng.normal())), 0.0);
    }
    add_layer(cell_polygon_layer("nighttime_population", value, grid));
  }
  add_layer(block_intensive_layer("median_income", mix(activity, layer_field("median_income"), 0.3),
                                  grid, [](double g) { return 45000.0 + 40000.0 * g; }));
  add_layer(block_intensive_layer("education_university_share",
                                  mix(activity, layer_field("education_university_share"), 0.25),
                                  grid, [](double g) { return 0.15 + 0.6 * g; }));
  add_layer(block_intensive_layer("age_20_34_share",
                                  mix(activity, layer_field("age_20_34_share"), 0.3), grid,
                                  [](double g) { return 0.1 + 0.35 * g; }));
  add_layer(block_intensive_layer("employment_rate",
                                  mix(activity, layer_field("employment_rate"), 0.2), grid,
                                  [](double g) { return 0.5 + 0.45 * g; }));
  add_layer(block_intensive_layer("commute_km_mean",
                                  mix(activity, layer_field("commute_km_mean"), 0.3), grid,
                                  [](double g) { return 3.0 + 25.0 * (1.0 - g); }));
  {
    Rng rng(derive_seed(spec.seed, "layer-industry_density"));
    const auto g = mix(activity, layer_field("industry_density"), 0.35);
    std::vector<double> value(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      value[i] = std::max(std::floor(180.0 * std::pow(g[i], 1.5) * (1.0 + 0.08 * rng.normal())), 0.0);
    }
    add_layer(cell_polygon_layer("industry_density", value, grid));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-bus_stop_count"));
    const auto g = mix(activity, layer_field("bus_stop_count"), 0.3);
    std::vector<double> rate(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      rate[i] = 0.3 + 10.0 * g[i] * g[i];
    }
    add_layer(point_layer("bus_stop_count", rate, grid, rng));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-park_area_m2"));
    const auto g = mix(activity, layer_field("park_area_m2"), 0.15);
    std::vector<double> value(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      value[i] = std::max(std::floor(90000.0 * g[i] * (1.0 + 0.1 * rng.normal())), 0.0);
    }
    add_layer(cell_polygon_layer("park_area_m2", value, grid));
  }
  {
    Rng rng(derive_seed(spec.seed, "layer-nonres_building_count"));
    const auto g = mix(activity, layer_field("nonres_building_count"), 0.35);
    std::vector<double> rate(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      rate[i] = 0.5 + 14.0 * g[i] * g[i];
    }
    add_layer(point_layer("nonres_building_count", rate, grid, rng));
  }

  // ---- planted law ---------------------------------------------------------
  Truth truth;
  truth.seed = spec.seed;
  truth.rho_target = spec.rho_target;
  truth.beta0 = kBeta0;
  truth.feature_names = layer_names;
  truth.relevant_features = {"transport_hubs", "road_length_m", "daytime_population", "poi_count",
                             "building_area_m2"};
  truth.transforms["transport_hubs"] = {"sat", 1.0, 5.0};
  truth.transforms["road_length_m"] = {"hinge", 1000.0, 1.5};
  truth.transforms["daytime_population"] = {"hinge", 1000.0, 1.2};
  truth.transforms["poi_count"] = {"sat", 1.0, 8.0};
  truth.transforms["building_area_m2"] = {"sat", 10000.0, 8.0};
  truth.betas["transport_hubs"] = 1.3;
  truth.betas["road_length_m"] = 6.5;
  truth.betas["daytime_population"] = 1.1;
  truth.betas["poi_count"] = 0.55;
  truth.betas["building_area_m2"] = 0.5;
  truth.indicator_scale = spec.indicator_scale;

  std::vector<double> signal(n_cells, kBeta0);
  for (const auto& name : truth.relevant_features) {
    const std::size_t layer_idx = static_cast<std::size_t>(
        std::find(layer_names.begin(), layer_names.end(), name) - layer_names.begin());
    const Transform& tf = truth.transforms.at(name);
    const double beta = truth.betas.at(name);
    for (std::size_t i = 0; i < n_cells; ++i) {
      signal[i] += beta * tf.apply(layers[layer_idx].cell_values[i]);
    }
  }

  // Target noise calibrated to rho: Var(eps) = Var(signal) * (1-rho)/rho.
  std::vector<double> target = signal;
  double sigma_eps = 0.0;
  if (spec.rho_target < 1.0) {
    const double var_signal = vec_variance(signal);
    sigma_eps = std::sqrt(var_signal * (1.0 - spec.rho_target) / spec.rho_target);
    Rng rng(derive_seed(spec.seed, "target-noise"));
    for (std::size_t i = 0; i < n_cells; ++i) {
      target[i] += sigma_eps * rng.normal();
    }
  }
  truth.sigma_target_noise = sigma_eps;
  for (double& t : target) {
    if (t < kTargetFloor) {
      t = kTargetFloor;
      ++truth.n_clamped;
    }
  }

  // ---- nighttime lights raster --------------------------------------------
  // Luminance follows the activity surface; pixel centers index cells through
  // the same locate() the pipeline uses, so the weight series is exact.
  ingest::RasterGrid raster;
  {
    const double deg_per_m_lat = 1.0 / (geo::kEarthRadiusM * std::numbers::pi / 180.0);
    raster.cell_deg = grid.cell_size_m * deg_per_m_lat / 3.0;
    raster.nodata = -9999.0;
    raster.origin = {spec.origin.lat - 2.0 * raster.cell_deg,
                     spec.origin.lon - 2.0 * raster.cell_deg};
    const geo::GeoPoint ne = geo::unproject({grid.n_cols * grid.cell_size_m,
                                             grid.n_rows * grid.cell_size_m},
                                            grid.projection_origin);
    raster.n_cols =
        static_cast<std::int32_t>(std::ceil((ne.lon - raster.origin.lon) / raster.cell_deg)) + 2;
    raster.n_rows =
        static_cast<std::int32_t>(std::ceil((ne.lat - raster.origin.lat) / raster.cell_deg)) + 2;
    raster.values.assign(static_cast<std::size_t>(raster.n_cols) * raster.n_rows, 0.05);

    const auto lum_field = mix(activity, layer_field("ntl"), 0.8);
    Rng rng(derive_seed(spec.seed, "ntl-noise"));
    for (std::int32_t row = 0; row < raster.n_rows; ++row) {
      for (std::int32_t col = 0; col < raster.n_cols; ++col) {
        const auto cell = geo::locate(raster.pixel_center(col, row), grid);
        double v;
        if (cell) {
          const double base = 0.15 + 0.85 * lum_field[cell_index(*cell, grid)];
          v = std::max(base * (1.0 + 0.04 * rng.normal()), 0.02);
        } else {
          v = std::max(0.05 * (1.0 + 0.2 * rng.normal()), 0.01);
        }
        raster.values[static_cast<std::size_t>(row) * raster.n_cols + col] = v;
      }
    }
    // A few nodata pixels on the outer margin exercise the nodata path.
    raster.values[0] = raster.nodata;
    raster.values[static_cast<std::size_t>(raster.n_cols) - 1] = raster.nodata;
  }
  const CellSeries ntl_weights = demand::ntl_weight_series(raster, grid);

  // ---- sites ---------------------------------------------------------------
  // Per-cell bandwidth budget B = target / ntl_weight, split over 1-3 sites
  // whose footprints are exactly their own cell at the configured threshold.
  std::vector<SiteRecord> sites;
  std::vector<std::vector<std::size_t>> site_ids_of_cell(n_cells);
  std::vector<std::vector<double>> shares_of_cell(n_cells);
  {
    // Extra sites go to the most active cells.
    std::vector<std::size_t> order(n_cells);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (activity[a] != activity[b]) {
        return activity[a] > activity[b];
      }
      return a < b;
    });
    const std::size_t n_extra =
        spec.n_sites > n_cells ? std::min(spec.n_sites - n_cells, 2 * n_cells) : 0;
    const std::size_t extra1 = std::min(n_extra, n_cells);
    const std::size_t extra2 = n_extra - extra1;
    std::vector<std::size_t> count(n_cells, 1);
    for (std::size_t r = 0; r < extra1; ++r) {
      ++count[order[r]];
    }
    for (std::size_t r = 0; r < extra2; ++r) {
      ++count[order[r]];
    }

    Rng rng(derive_seed(spec.seed, "sites"));
    for (std::size_t i = 0; i < n_cells; ++i) {
      const CellId c = cell_at(i, grid);
      const ProjectedPoint center = geo::cell_center(c, grid);
      const double budget = target[i] / ntl_weights.at(c);

      std::vector<double> shares(count[i]);
      double share_sum = 0.0;
      for (double& s : shares) {
        s = rng.uniform(0.5, 1.5);
        share_sum += s;
      }
      for (double& s : shares) {
        s /= share_sum;
      }

      for (std::size_t j = 0; j < count[i]; ++j) {
        SiteRecord site;
        site.site_id = "S" + std::to_string(100000 + sites.size());
        const double jx = rng.uniform(-200.0, 200.0);
        const double jy = rng.uniform(-200.0, 200.0);
        site.location = geo::unproject({center.x + jx, center.y + jy}, grid.projection_origin);
        site.tx_power_dbm = rng.uniform(18.0, 30.0);
        site.antenna_height_m = rng.uniform(30.0, 50.0);
        site.center_freq_mhz = rng.uniform() < 0.5 ? 800.0 : 900.0;
        site.bandwidth_mhz = budget * shares[j];
        site.environment = propagation::Environment::kUrban;
        site_ids_of_cell[i].push_back(sites.size());
        shares_of_cell[i].push_back(shares[j]);
        sites.push_back(std::move(site));
      }
    }
  }

  // ---- crowdsourced measurements -------------------------------------------
  std::vector<ingest::MeasurementRecord> measurements;
  {
    Rng rng(derive_seed(spec.seed, "measurements"));
    const auto g = mix(activity, layer_field("measurements"), 0.7);
    for (std::size_t i = 0; i < n_cells; ++i) {
      const std::int64_t samples = 1 + static_cast<std::int64_t>(std::floor(300.0 * g[i] * g[i]));
      const CellId c = cell_at(i, grid);
      if (samples >= 2) {
        const std::int64_t first = samples / 2;
        measurements.push_back({interior_point(c, grid, rng), first});
        measurements.push_back({interior_point(c, grid, rng), samples - first});
      } else {
        measurements.push_back({interior_point(c, grid, rng), samples});
      }
    }
  }
  const CellSeries user_weights = demand::user_weight_series(measurements, grid);

  // ---- indicator + traffic --------------------------------------------------
  // indicator = a * target + eps + offset with eps exactly orthogonal to the
  // target and scaled so that OLS R^2 equals rho_target up to rounding.
  std::vector<ingest::TrafficRecord> traffic;
  {
    std::vector<double> scaled(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      scaled[i] = spec.indicator_scale * target[i];
    }
    std::vector<double> eps(n_cells, 0.0);
    if (spec.rho_target < 1.0) {
      Rng rng(derive_seed(spec.seed, "indicator-noise"));
      for (double& e : eps) {
        e = rng.normal();
      }
      const double eps_mean = vec_mean(eps);
      for (double& e : eps) {
        e -= eps_mean;
      }
      const double t_mean = vec_mean(scaled);
      double dot = 0.0;
      double t_ss = 0.0;
      for (std::size_t i = 0; i < n_cells; ++i) {
        dot += eps[i] * (scaled[i] - t_mean);
        t_ss += (scaled[i] - t_mean) * (scaled[i] - t_mean);
      }
      for (std::size_t i = 0; i < n_cells; ++i) {
        eps[i] -= (dot / t_ss) * (scaled[i] - t_mean);
      }
      const double eps_sd = std::sqrt(vec_variance(eps));
      const double want_sd =
          std::sqrt((t_ss / static_cast<double>(n_cells)) * (1.0 - spec.rho_target) /
                    spec.rho_target);
      const double k = eps_sd > 0.0 ? want_sd / eps_sd : 0.0;
      for (double& e : eps) {
        e *= k;
      }
    }
    double min_v = scaled[0] + eps[0];
    double mean_scaled = 0.0;
    for (std::size_t i = 0; i < n_cells; ++i) {
      min_v = std::min(min_v, scaled[i] + eps[i]);
      mean_scaled += scaled[i];
    }
    mean_scaled /= static_cast<double>(n_cells);
    const double offset = std::max(0.0, -min_v) + 0.05 * mean_scaled;
    truth.indicator_offset = offset;

    // Weekday diurnal profile; the mean over hours is exactly the site mean.
    const double profile[24] = {0.35, 0.25, 0.2,  0.18, 0.2,  0.3, 0.5, 0.8,  1.0,  1.1,  1.15, 1.2,
                                1.25, 1.2,  1.15, 1.1,  1.15, 1.3, 1.45, 1.5, 1.4,  1.1,  0.8,  0.5};
    double profile_sum = 0.0;
    for (const double p : profile) {
      profile_sum += p;
    }

    for (std::size_t i = 0; i < n_cells; ++i) {
      const CellId c = cell_at(i, grid);
      const double indicator = scaled[i] + eps[i] + offset;
      const double cell_throughput = indicator / user_weights.at(c);
      for (std::size_t j = 0; j < site_ids_of_cell[i].size(); ++j) {
        const double site_mean = cell_throughput * shares_of_cell[i][j];
        const std::string& id = sites[site_ids_of_cell[i][j]].site_id;
        for (int hour = 0; hour < 24; ++hour) {
          traffic.push_back(
              {id, "2024-06-03", hour, site_mean * 24.0 * profile[hour] / profile_sum});
        }
      }
    }
  }

  // ---- write everything -----------------------------------------------------
  ingest::write_sites(sites, out_dir + "/sites.csv");
  ingest::write_traffic(traffic, out_dir + "/traffic.csv");
  ingest::write_measurements(measurements, out_dir + "/measurements.csv");
  ingest::write_raster(raster, out_dir + "/ntl.asc");

  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& layer : layers) {
    const std::string file = layer.source.name + ".geojson";
    ingest::write_feature_source(layer.source, out_dir + "/features/" + file);
    nlohmann::json entry{{"file", file},
                         {"name", layer.source.name},
                         {"kind", ingest::to_string(layer.source.kind)}};
    if (layer.source.kind == ingest::SourceKind::kPolygonValue) {
      entry["allocation"] = ingest::to_string(layer.source.allocation);
    }
    manifest.push_back(entry);
  }
  ingest::write_text_file(out_dir + "/features/manifest.json", manifest.dump(2) + "\n");
  truth.save(out_dir + "/truth.json");

  // ---- self check ------------------------------------------------------------
  // The weighted proxy recomputed through the real pipeline must reproduce the
  // planted target.
  GenerateResult result;
  result.grid = grid;
  result.n_cells = n_cells;
  result.n_sites = sites.size();
  {
    const auto fps =
        propagation::footprints(sites, grid, spec.rx_threshold_dbm, spec.mobile_height_m);
    const CellSeries bandwidth = demand::deployed_bandwidth(sites, fps, grid);
    const CellSeries proxy = demand::weighted_proxy(bandwidth, ntl_weights);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < n_cells; ++i) {
      const CellId c = cell_at(i, grid);
      const double got = proxy.at(c);
      const double want = target[i];
      max_rel = std::max(max_rel, std::abs(got - want) / std::max(1e-12, std::abs(want)));
    }
    result.proxy_check_max_rel_err = max_rel;
    if (max_rel > 1e-6) {
      throw Error("synthetic city self-check failed: proxy deviates from target by " +
                  std::to_string(max_rel));
    }
  }
  return result;
}

std::pair<GenerateResult, GenerateResult> twin_cities(const CitySpec& spec, std::uint64_t seed_a,
                                                      std::uint64_t seed_b,
                                                      const std::string& dir_a,
                                                      const std::string& dir_b) {
  CitySpec a = spec;
  a.seed = seed_a;
  CitySpec b = spec;
  b.seed = seed_b;
  return {generate(a, dir_a), generate(b, dir_b)};
}

}  // namespace sdk::synth
