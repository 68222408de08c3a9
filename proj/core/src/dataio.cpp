#include "cemreg/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cemreg/errors.hpp"
#include "cemreg/rng.hpp"

namespace cemreg {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Reads `count` doubles from `line`; returns false when fewer are present or a
// token is not numeric. Extra trailing tokens are tolerated (PLY vertex rows
// may carry colors or normals).
bool parse_doubles(const std::string& line, double* out, int count) {
  std::istringstream stream(line);
  for (int i = 0; i < count; ++i) {
    if (!(stream >> out[i])) return false;
  }
  return true;
}

PointCloud load_xyz_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Eigen::RowVector3d> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    double xyz[3];
    std::istringstream stream(line);
    if (!(stream >> xyz[0] >> xyz[1] >> xyz[2]))
      throw FormatError(path.string(), line_no, "expected three numeric columns");
    std::string extra;
    if (stream >> extra)
      throw FormatError(path.string(), line_no, "expected exactly three columns");
    rows.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  if (rows.empty())
    throw DegenerateInputError(path.string() + ": no points in file");
  PointCloud::Matrix points(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    points.row(static_cast<Eigen::Index>(i)) = rows[i];
  return PointCloud(std::move(points));
}

// Pulls the next line that is not blank or a '#' comment; false at EOF.
bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank_or_comment(line)) return true;
  }
  return false;
}

PointCloud load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int line_no = 0;

  if (!next_content_line(in, line, line_no))
    throw FormatError(path.string(), line_no, "empty OFF file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF")
    throw FormatError(path.string(), line_no, "missing OFF header");

  // Counts may share the header line or sit on the next one.
  long vertex_count = -1, face_count = 0, edge_count = 0;
  if (!(header >> vertex_count >> face_count >> edge_count)) {
    if (!next_content_line(in, line, line_no))
      throw FormatError(path.string(), line_no, "missing OFF element counts");
    std::istringstream counts(line);
    if (!(counts >> vertex_count >> face_count >> edge_count))
      throw FormatError(path.string(), line_no, "malformed OFF element counts");
  }
  if (vertex_count <= 0)
    throw DegenerateInputError(path.string() + ": OFF file declares no vertices");

  PointCloud::Matrix points(vertex_count, 3);
  for (long i = 0; i < vertex_count; ++i) {
    if (!next_content_line(in, line, line_no))
      throw FormatError(path.string(), line_no,
                        "file ends after " + std::to_string(i) + " of " +
                            std::to_string(vertex_count) + " vertices");
    double xyz[3];
    if (!parse_doubles(line, xyz, 3))
      throw FormatError(path.string(), line_no, "malformed OFF vertex line");
    points.row(i) << xyz[0], xyz[1], xyz[2];
  }
  // Faces (and anything after) are irrelevant for point clouds.
  return PointCloud(std::move(points));
}

PointCloud load_ply_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw FormatError(path.string(), 1, "empty PLY file");
  ++line_no;
  if (line.rfind("ply", 0) != 0)
    throw FormatError(path.string(), line_no, "missing ply header");

  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> properties;  // scalar property names, in order
    bool has_list_property = false;
  };
  std::vector<Element> elements;
  bool ascii = false;
  bool saw_end = false;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream stream(line);
    std::string keyword;
    stream >> keyword;
    if (keyword == "comment" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string kind;
      stream >> kind;
      if (kind != "ascii")
        throw FormatError(path.string(), line_no, "only ascii PLY is supported");
      ascii = true;
    } else if (keyword == "element") {
      Element element;
      if (!(stream >> element.name >> element.count))
        throw FormatError(path.string(), line_no, "malformed element declaration");
      elements.push_back(element);
    } else if (keyword == "property") {
      if (elements.empty())
        throw FormatError(path.string(), line_no, "property before any element");
      std::string type;
      stream >> type;
      if (type == "list") {
        elements.back().has_list_property = true;
      } else {
        std::string name;
        if (!(stream >> name))
          throw FormatError(path.string(), line_no, "malformed property declaration");
        elements.back().properties.push_back(name);
      }
    } else if (keyword == "end_header") {
      saw_end = true;
      break;
    } else {
      throw FormatError(path.string(), line_no, "unrecognized header keyword '" + keyword + "'");
    }
  }
  if (!saw_end) throw FormatError(path.string(), line_no, "missing end_header");
  if (!ascii) throw FormatError(path.string(), line_no, "missing format declaration");

  const auto vertex_it =
      std::find_if(elements.begin(), elements.end(),
                   [](const Element& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end())
    throw FormatError(path.string(), line_no, "PLY file has no vertex element");
  if (vertex_it->count <= 0)
    throw DegenerateInputError(path.string() + ": PLY file declares no vertices");
  if (vertex_it->has_list_property)
    throw FormatError(path.string(), line_no, "list properties on vertices are not supported");

  int coord_index[3] = {-1, -1, -1};
  const char* names[3] = {"x", "y", "z"};
  for (int axis = 0; axis < 3; ++axis) {
    const auto it = std::find(vertex_it->properties.begin(),
                              vertex_it->properties.end(), names[axis]);
    if (it == vertex_it->properties.end())
      throw FormatError(path.string(), line_no,
                        std::string("vertex element lacks property '") + names[axis] + "'");
    coord_index[axis] = static_cast<int>(it - vertex_it->properties.begin());
  }

  PointCloud::Matrix points(vertex_it->count, 3);
  for (const Element& element : elements) {
    if (element.name == "vertex") {
      std::vector<double> row(element.properties.size());
      for (long i = 0; i < element.count; ++i) {
        if (!std::getline(in, line))
          throw FormatError(path.string(), line_no,
                            "file ends after " + std::to_string(i) + " of " +
                                std::to_string(element.count) + " vertices");
        ++line_no;
        if (!parse_doubles(line, row.data(), static_cast<int>(row.size())))
          throw FormatError(path.string(), line_no, "malformed vertex line");
        points.row(i) << row[coord_index[0]], row[coord_index[1]], row[coord_index[2]];
      }
    } else {
      // Skip the data lines of any other element (faces etc.).
      for (long i = 0; i < element.count; ++i) {
        if (!std::getline(in, line))
          throw FormatError(path.string(), line_no,
                            "file ends inside element '" + element.name + "'");
        ++line_no;
      }
    }
  }
  return PointCloud(std::move(points));
}

}  // namespace

CloudFormat cloud_format_from_path(const std::filesystem::path& path) {
  const std::string ext = lowercase(path.extension().string());
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::XyzText;
  if (ext == ".off") return CloudFormat::Off;
  if (ext == ".ply") return CloudFormat::PlyAscii;
  throw FormatError(path.string(), 0, "unrecognized cloud file extension '" + ext + "'");
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  switch (format) {
    case CloudFormat::XyzText: return load_xyz_text(path);
    case CloudFormat::Off: return load_off(path);
    case CloudFormat::PlyAscii: return load_ply_ascii(path);
  }
  throw std::invalid_argument("load_cloud: unknown format");
}

PointCloud load_cloud(const std::filesystem::path& path) {
  return load_cloud(path, cloud_format_from_path(path));
}

void save_cloud_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  std::string body;
  body.reserve(static_cast<std::size_t>(cloud.size()) * 72);
  char line[256];
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    // %.17g round-trips doubles exactly through text.
    std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", cloud.points()(i, 0),
                  cloud.points()(i, 1), cloud.points()(i, 2));
    body += line;
  }
  write_file_atomic(path, body);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SurfaceShape surface_shape_from_name(const std::string& name) {
  const std::string lower = lowercase(name);
  if (lower == "sphere") return SurfaceShape::Sphere;
  if (lower == "torus") return SurfaceShape::Torus;
  if (lower == "box") return SurfaceShape::Box;
  if (lower == "wedge") return SurfaceShape::Wedge;
  throw std::invalid_argument("unknown shape '" + name + "'");
}

std::string to_string(SurfaceShape shape) {
  switch (shape) {
    case SurfaceShape::Sphere: return "sphere";
    case SurfaceShape::Torus: return "torus";
    case SurfaceShape::Box: return "box";
    case SurfaceShape::Wedge: return "wedge";
  }
  return "unknown";
}

namespace {

Eigen::RowVector3d sample_sphere_point(Rng& rng) {
  while (true) {
    const double x = rng.gaussian();
    const double y = rng.gaussian();
    const double z = rng.gaussian();
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (norm > 1e-12) return Eigen::RowVector3d(x / norm, y / norm, z / norm);
  }
}

Eigen::RowVector3d sample_torus_point(Rng& rng) {
  // Major radius 1, minor radius 0.4; rejection keeps the sampling
  // area-uniform (outer rim has more surface per unit of angle).
  constexpr double kMajor = 1.0;
  constexpr double kMinor = 0.4;
  while (true) {
    const double u = rng.uniform(0.0, 2.0 * kPi);
    const double v = rng.uniform(0.0, 2.0 * kPi);
    const double accept = (kMajor + kMinor * std::cos(v)) / (kMajor + kMinor);
    if (rng.uniform() > accept) continue;
    const double ring = kMajor + kMinor * std::cos(v);
    return Eigen::RowVector3d(ring * std::cos(u), ring * std::sin(u),
                              kMinor * std::sin(v));
  }
}

Eigen::RowVector3d sample_box_point(Rng& rng) {
  // Unit cube surface centered at the origin; all six faces share one area.
  const std::uint64_t face = rng.below(6);
  const double a = rng.uniform(-0.5, 0.5);
  const double b = rng.uniform(-0.5, 0.5);
  switch (face) {
    case 0: return Eigen::RowVector3d(0.5, a, b);
    case 1: return Eigen::RowVector3d(-0.5, a, b);
    case 2: return Eigen::RowVector3d(a, 0.5, b);
    case 3: return Eigen::RowVector3d(a, -0.5, b);
    case 4: return Eigen::RowVector3d(a, b, 0.5);
    default: return Eigen::RowVector3d(a, b, -0.5);
  }
}

Eigen::RowVector3d sample_wedge_point(Rng& rng) {
  // Triangular prism: right triangle (0,0)-(1,0)-(0,1) in xy, z in [0,1].
  // Deliberately asymmetric so a registration problem on it has one answer.
  const double kSqrt2 = std::sqrt(2.0);
  // Face areas: two triangle caps (0.5 each), bottom 1, left 1, hypotenuse sqrt(2).
  const double total = 0.5 + 0.5 + 1.0 + 1.0 + kSqrt2;
  double pick = rng.uniform(0.0, total);
  const double z = rng.uniform(0.0, 1.0);
  const double s = rng.uniform(0.0, 1.0);
  if (pick < 1.0) {  // one of the caps
    double u = rng.uniform(0.0, 1.0);
    double v = rng.uniform(0.0, 1.0);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    return Eigen::RowVector3d(u, v, pick < 0.5 ? 0.0 : 1.0);
  }
  pick -= 1.0;
  if (pick < 1.0) return Eigen::RowVector3d(s, 0.0, z);  // bottom face y=0
  pick -= 1.0;
  if (pick < 1.0) return Eigen::RowVector3d(0.0, s, z);  // left face x=0
  return Eigen::RowVector3d(s, 1.0 - s, z);              // hypotenuse face
}

}  // namespace

PointCloud sample_surface(SurfaceShape shape, int count, std::uint64_t seed) {
  if (count < 4) throw std::invalid_argument("sample_surface: need at least 4 points");
  Rng rng(seed);
  PointCloud::Matrix points(count, 3);
  for (int i = 0; i < count; ++i) {
    switch (shape) {
      case SurfaceShape::Sphere: points.row(i) = sample_sphere_point(rng); break;
      case SurfaceShape::Torus: points.row(i) = sample_torus_point(rng); break;
      case SurfaceShape::Box: points.row(i) = sample_box_point(rng); break;
      case SurfaceShape::Wedge: points.row(i) = sample_wedge_point(rng); break;
    }
  }
  return PointCloud(std::move(points));
}

RegistrationPair make_pair(const PointCloud& source, double max_rotation_deg,
                           double max_translation,
                           const std::optional<NoiseSpec>& noise,
                           std::uint64_t seed) {
  if (!(max_rotation_deg >= 0.0) || max_rotation_deg > 180.0)
    throw std::invalid_argument("make_pair: max_rotation_deg must be in [0, 180]");
  if (!(max_translation >= 0.0))
    throw std::invalid_argument("make_pair: max_translation must be non-negative");

  Rng rng(seed);
  Eigen::Vector3d euler;
  for (int i = 0; i < 3; ++i)
    euler(i) = to_radians(rng.uniform(0.0, max_rotation_deg));
  Eigen::Vector3d translation;
  for (int i = 0; i < 3; ++i)
    translation(i) = rng.uniform(-max_translation, max_translation);

  RegistrationPair pair;
  pair.ground_truth = Action(euler, translation);
  pair.source = source;
  pair.target = apply_action(source, *pair.ground_truth);
  if (noise) {
    pair.target = add_gaussian_noise(pair.target, noise->stddev, noise->clip,
                                     derive_seed(seed, 1));
  }
  return pair;
}

namespace {

nlohmann::json action_to_json(const Action& action) {
  return nlohmann::json{
      {"euler", {action.euler(0), action.euler(1), action.euler(2)}},
      {"translation",
       {action.translation(0), action.translation(1), action.translation(2)}}};
}

Action action_from_json(const nlohmann::json& j) {
  const auto& e = j.at("euler");
  const auto& t = j.at("translation");
  if (e.size() != 3 || t.size() != 3)
    throw FormatError("manifest", 0, "ground_truth arrays must have 3 entries");
  return Action(Eigen::Vector3d(e[0].get<double>(), e[1].get<double>(), e[2].get<double>()),
                Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

constexpr const char* kManifestKind = "cemreg-dataset";
constexpr int kManifestVersion = 1;

}  // namespace

void write_manifest(const Dataset& dataset) {
  nlohmann::json j;
  j["kind"] = kManifestKind;
  j["version"] = kManifestVersion;
  j["seed"] = dataset.seed;
  nlohmann::json config = nlohmann::json::array();
  for (const auto& [key, value] : dataset.config_echo)
    config.push_back({key, value});
  j["config"] = config;
  nlohmann::json entries = nlohmann::json::array();
  for (const DatasetEntry& entry : dataset.entries) {
    nlohmann::json e{{"split", entry.split},     {"index", entry.index},
                     {"shape", entry.shape},     {"source", entry.source_file},
                     {"target", entry.target_file}, {"pair_seed", entry.pair_seed},
                     {"noisy", entry.noisy}};
    if (entry.ground_truth) e["ground_truth"] = action_to_json(*entry.ground_truth);
    entries.push_back(e);
  }
  j["entries"] = entries;
  write_file_atomic(dataset.root / "manifest.json", j.dump(2) + "\n");
}

Dataset read_manifest(const std::filesystem::path& root) {
  const std::filesystem::path path = root / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw FormatError(path.string(), 0, err.what());
  }
  if (j.value("kind", "") != kManifestKind)
    throw FormatError(path.string(), 0, "not a dataset manifest");
  if (j.value("version", 0) != kManifestVersion)
    throw FormatError(path.string(), 0, "unsupported manifest version");

  Dataset dataset;
  dataset.root = root;
  dataset.seed = j.value("seed", std::uint64_t{0});
  for (const auto& pair : j.value("config", nlohmann::json::array()))
    dataset.config_echo.emplace_back(pair.at(0).get<std::string>(),
                                     pair.at(1).get<std::string>());
  for (const auto& e : j.at("entries")) {
    DatasetEntry entry;
    entry.split = e.at("split").get<std::string>();
    entry.index = e.at("index").get<int>();
    entry.shape = e.at("shape").get<std::string>();
    entry.source_file = e.at("source").get<std::string>();
    entry.target_file = e.at("target").get<std::string>();
    entry.pair_seed = e.value("pair_seed", std::uint64_t{0});
    entry.noisy = e.value("noisy", false);
    if (e.contains("ground_truth")) entry.ground_truth = action_from_json(e["ground_truth"]);
    dataset.entries.push_back(std::move(entry));
  }
  return dataset;
}

std::vector<const DatasetEntry*> entries_for_split(const Dataset& dataset,
                                                   const std::string& split) {
  std::vector<const DatasetEntry*> out;
  for (const DatasetEntry& entry : dataset.entries)
    if (entry.split == split) out.push_back(&entry);
  return out;
}

RegistrationPair load_pair(const Dataset& dataset, const DatasetEntry& entry) {
  RegistrationPair pair;
  pair.source = load_cloud(dataset.root / entry.source_file);
  pair.target = load_cloud(dataset.root / entry.target_file);
  pair.ground_truth = entry.ground_truth;
  return pair;
}

}  // namespace cemreg
