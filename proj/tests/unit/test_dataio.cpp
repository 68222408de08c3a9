#include "cemreg/dataio.hpp"

#include <cmath>

#include "cemreg/errors.hpp"
#include "cemreg/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cemreg;
using namespace cemreg::testing;

TEST_CASE("cloud_format_from_path keys off the extension") {
  CHECK(cloud_format_from_path("a/b.xyz") == CloudFormat::XyzText);
  CHECK(cloud_format_from_path("a/b.txt") == CloudFormat::XyzText);
  CHECK(cloud_format_from_path("a/b.OFF") == CloudFormat::Off);
  CHECK(cloud_format_from_path("a/b.ply") == CloudFormat::PlyAscii);
  CHECK_THROWS_AS(cloud_format_from_path("a/b.obj"), FormatError);
}

TEST_CASE("xyz loader reads one point per line") {
  TempDir dir("xyz");
  write_text(dir.file("c.xyz"), "0 0 0\n1.5 -2 3e-1\n0.25 0.5 0.75\n");
  const PointCloud cloud = load_cloud(dir.file("c.xyz"));
  REQUIRE(cloud.size() == 3);
  CHECK((cloud.point(1) - Eigen::Vector3d(1.5, -2.0, 0.3)).norm() < 1e-15);
}

TEST_CASE("xyz loader reports malformed lines with their line number") {
  TempDir dir("xyz_bad");
  write_text(dir.file("c.xyz"), "0 0 0\n1 2\n");
  try {
    load_cloud(dir.file("c.xyz"));
    FAIL("expected FormatError");
  } catch (const FormatError& err) {
    CHECK(err.line() == 2);
  }

  write_text(dir.file("d.xyz"), "0 0 0\n1 2 3 4\n");
  try {
    load_cloud(dir.file("d.xyz"));
    FAIL("expected FormatError");
  } catch (const FormatError& err) {
    CHECK(err.line() == 2);
  }
}

TEST_CASE("loaders reject files that declare no points") {
  TempDir dir("empty");
  write_text(dir.file("c.xyz"), "");
  CHECK_THROWS_AS(load_cloud(dir.file("c.xyz")), DegenerateInputError);

  write_text(dir.file("c.off"), "OFF\n0 0 0\n");
  CHECK_THROWS_AS(load_cloud(dir.file("c.off")), DegenerateInputError);

  write_text(dir.file("c.ply"),
             "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\n"
             "property float y\nproperty float z\nend_header\n");
  CHECK_THROWS_AS(load_cloud(dir.file("c.ply")), DegenerateInputError);
}

TEST_CASE("missing file surfaces as an IO error with the path") {
  TempDir dir("missing");
  try {
    load_cloud(dir.file("nope.xyz"));
    FAIL("expected IoError");
  } catch (const IoError& err) {
    CHECK(std::string(err.what()).find("nope.xyz") != std::string::npos);
  }
}

TEST_CASE("OFF loader reads vertices and ignores faces") {
  TempDir dir("off");
  write_text(dir.file("cube.off"),
             "OFF\n8 6 12\n"
             "-1 -1 -1\n1 -1 -1\n1 1 -1\n-1 1 -1\n"
             "-1 -1 1\n1 -1 1\n1 1 1\n-1 1 1\n"
             "4 0 1 2 3\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 0 3 7 4\n4 1 2 6 5\n");
  const PointCloud cloud = load_cloud(dir.file("cube.off"));
  REQUIRE(cloud.size() == 8);
  CHECK((cloud.point(0) - Eigen::Vector3d(-1, -1, -1)).norm() == 0.0);
  CHECK((cloud.point(6) - Eigen::Vector3d(1, 1, 1)).norm() == 0.0);
}

TEST_CASE("OFF loader accepts counts on the header line") {
  TempDir dir("off_inline");
  write_text(dir.file("tri.off"), "OFF 3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK(load_cloud(dir.file("tri.off")).size() == 3);
}

TEST_CASE("PLY loader reads ascii vertices and skips extra properties and elements") {
  TempDir dir("ply");
  write_text(dir.file("c.ply"),
             "ply\n"
             "format ascii 1.0\n"
             "comment made by hand\n"
             "element vertex 2\n"
             "property float x\n"
             "property float y\n"
             "property float z\n"
             "property uchar red\n"
             "element face 1\n"
             "property list uchar int vertex_indices\n"
             "end_header\n"
             "0 0 0 255\n"
             "1 2 3 0\n"
             "3 0 1 0\n");
  const PointCloud cloud = load_cloud(dir.file("c.ply"));
  REQUIRE(cloud.size() == 2);
  CHECK((cloud.point(1) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("PLY loader rejects binary files") {
  TempDir dir("ply_bin");
  write_text(dir.file("c.ply"),
             "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
             "property float x\nproperty float y\nproperty float z\nend_header\n");
  CHECK_THROWS_AS(load_cloud(dir.file("c.ply")), FormatError);
}

TEST_CASE("save_cloud_xyz round-trips coordinates exactly") {
  TempDir dir("roundtrip");
  Rng rng(41);
  const PointCloud cloud = random_cloud(64, rng);
  save_cloud_xyz(cloud, dir.file("c.xyz"));
  const PointCloud back = load_cloud(dir.file("c.xyz"));
  REQUIRE(back.size() == cloud.size());
  CHECK((back.points() - cloud.points()).norm() == 0.0);
}

TEST_CASE("write_file_atomic leaves no temp litter and replaces content") {
  TempDir dir("atomic");
  write_file_atomic(dir.file("x.txt"), "first");
  write_file_atomic(dir.file("x.txt"), "second");
  CHECK(read_text(dir.file("x.txt")) == "second");
  int files = 0;
  for ([[maybe_unused]] const auto& entry :
       std::filesystem::directory_iterator(dir.path()))
    ++files;
  CHECK(files == 1);
}

TEST_CASE("sample_surface needs at least four points") {
  CHECK_THROWS_AS(sample_surface(SurfaceShape::Sphere, 3, 1), std::invalid_argument);
  CHECK(sample_surface(SurfaceShape::Sphere, 4, 1).size() == 4);
}

TEST_CASE("sample_surface is deterministic in the seed") {
  for (const SurfaceShape shape : {SurfaceShape::Sphere, SurfaceShape::Torus,
                                   SurfaceShape::Box, SurfaceShape::Wedge}) {
    const PointCloud a = sample_surface(shape, 128, 5);
    const PointCloud b = sample_surface(shape, 128, 5);
    const PointCloud c = sample_surface(shape, 128, 6);
    CHECK((a.points() - b.points()).norm() == 0.0);
    CHECK((a.points() - c.points()).norm() > 0.0);
  }
}

TEST_CASE("sphere samples sit on the unit sphere and cover octants evenly") {
  const int n = 8000;
  const PointCloud cloud = sample_surface(SurfaceShape::Sphere, n, 42);
  int first_octant = 0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.point(i).norm() == doctest::Approx(1.0).epsilon(1e-9));
    if (cloud.point(i).minCoeff() > 0.0) ++first_octant;
  }
  // Binomial(n, 1/8): allow 4 sigma around the expectation.
  const double expected = n / 8.0;
  const double sigma = std::sqrt(n * (1.0 / 8.0) * (7.0 / 8.0));
  CHECK(std::abs(first_octant - expected) < 4.0 * sigma);
}

TEST_CASE("box samples lie on the surface of the centered unit cube") {
  const PointCloud cloud = sample_surface(SurfaceShape::Box, 4000, 43);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    CHECK(p.cwiseAbs().maxCoeff() == doctest::Approx(0.5).epsilon(1e-12));
  }
  // All six faces get hit: count per dominant axis sign.
  int face_counts[6] = {0, 0, 0, 0, 0, 0};
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    for (int axis = 0; axis < 3; ++axis) {
      if (std::abs(std::abs(p(axis)) - 0.5) < 1e-12) {
        ++face_counts[2 * axis + (p(axis) > 0 ? 0 : 1)];
        break;
      }
    }
  }
  for (const int count : face_counts) CHECK(count > 0);
}

TEST_CASE("torus samples respect the ring geometry") {
  const PointCloud cloud = sample_surface(SurfaceShape::Torus, 2000, 44);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    const double ring = std::hypot(p.x(), p.y());
    const double minor = std::hypot(ring - 1.0, p.z());
    CHECK(minor == doctest::Approx(0.4).epsilon(1e-9));
  }
}

TEST_CASE("wedge samples stay inside the prism bounds") {
  const PointCloud cloud = sample_surface(SurfaceShape::Wedge, 2000, 45);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    CHECK(p.x() >= -1e-12);
    CHECK(p.y() >= -1e-12);
    CHECK(p.x() + p.y() <= 1.0 + 1e-12);
    CHECK(p.z() >= -1e-12);
    CHECK(p.z() <= 1.0 + 1e-12);
  }
}

TEST_CASE("surface_shape_from_name round-trips and rejects junk") {
  for (const SurfaceShape shape : {SurfaceShape::Sphere, SurfaceShape::Torus,
                                   SurfaceShape::Box, SurfaceShape::Wedge})
    CHECK(surface_shape_from_name(to_string(shape)) == shape);
  CHECK_THROWS_AS(surface_shape_from_name("pyramid"), std::invalid_argument);
}

TEST_CASE("make_pair with zero ranges and no noise returns the source as target") {
  const PointCloud source = sample_surface(SurfaceShape::Box, 100, 46);
  const RegistrationPair pair = make_pair(source, 0.0, 0.0, std::nullopt, 9);
  REQUIRE(pair.ground_truth.has_value());
  CHECK(pair.ground_truth->euler.norm() == 0.0);
  CHECK(pair.ground_truth->translation.norm() == 0.0);
  CHECK((pair.target.points() - source.points()).norm() == 0.0);
}

TEST_CASE("make_pair draws transforms inside the configured ranges") {
  const PointCloud source = sample_surface(SurfaceShape::Wedge, 64, 47);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RegistrationPair pair = make_pair(source, 45.0, 0.5, std::nullopt, seed);
    REQUIRE(pair.ground_truth.has_value());
    for (int i = 0; i < 3; ++i) {
      CHECK(pair.ground_truth->euler(i) >= 0.0);
      CHECK(pair.ground_truth->euler(i) <= to_radians(45.0) + 1e-12);
      CHECK(std::abs(pair.ground_truth->translation(i)) <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("make_pair without noise keeps target equal to the moved source") {
  const PointCloud source = sample_surface(SurfaceShape::Torus, 96, 48);
  const RegistrationPair pair = make_pair(source, 30.0, 0.3, std::nullopt, 77);
  const PointCloud expected = apply_action(pair.source, *pair.ground_truth);
  CHECK((pair.target.points() - expected.points()).norm() == 0.0);
}

TEST_CASE("make_pair noise stays within the clip bound and is seed-stable") {
  const PointCloud source = sample_surface(SurfaceShape::Sphere, 128, 49);
  const NoiseSpec noise;  // stddev 0.01, clip 0.05
  const RegistrationPair a = make_pair(source, 20.0, 0.2, noise, 5);
  const RegistrationPair b = make_pair(source, 20.0, 0.2, noise, 5);
  CHECK((a.target.points() - b.target.points()).norm() == 0.0);

  const PointCloud clean = apply_action(a.source, *a.ground_truth);
  const PointCloud::Matrix delta = a.target.points() - clean.points();
  CHECK(delta.norm() > 0.0);
  CHECK(delta.cwiseAbs().maxCoeff() <= noise.clip + 1e-15);
}

TEST_CASE("make_pair validates its ranges") {
  const PointCloud source = sample_surface(SurfaceShape::Box, 32, 50);
  CHECK_THROWS_AS(make_pair(source, -1.0, 0.5, std::nullopt, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_pair(source, 181.0, 0.5, std::nullopt, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_pair(source, 45.0, -0.5, std::nullopt, 1), std::invalid_argument);
}

TEST_CASE("dataset manifest round-trips entries and ground truth") {
  TempDir dir("manifest");
  Dataset dataset;
  dataset.root = dir.path();
  dataset.seed = 123;
  dataset.config_echo = {{"data.points", "64"}, {"data.seed", "123"}};

  const PointCloud source = sample_surface(SurfaceShape::Box, 64, 51);
  const RegistrationPair pair = make_pair(source, 45.0, 0.5, std::nullopt, 52);

  DatasetEntry entry;
  entry.split = "train";
  entry.index = 0;
  entry.shape = "box";
  entry.source_file = "train/pair0000_source.xyz";
  entry.target_file = "train/pair0000_target.xyz";
  entry.ground_truth = pair.ground_truth;
  entry.pair_seed = 52;
  dataset.entries.push_back(entry);

  save_cloud_xyz(pair.source, dir.path() / entry.source_file);
  save_cloud_xyz(pair.target, dir.path() / entry.target_file);
  write_manifest(dataset);

  const Dataset back = read_manifest(dir.path());
  CHECK(back.seed == 123);
  REQUIRE(back.entries.size() == 1);
  const DatasetEntry& e = back.entries[0];
  CHECK(e.split == "train");
  CHECK(e.shape == "box");
  CHECK(e.pair_seed == 52);
  REQUIRE(e.ground_truth.has_value());
  CHECK((e.ground_truth->euler - pair.ground_truth->euler).norm() == 0.0);
  CHECK((e.ground_truth->translation - pair.ground_truth->translation).norm() == 0.0);
  CHECK(back.config_echo == dataset.config_echo);

  REQUIRE(entries_for_split(back, "train").size() == 1);
  CHECK(entries_for_split(back, "test").empty());

  const RegistrationPair loaded = load_pair(back, e);
  CHECK((loaded.source.points() - pair.source.points()).norm() == 0.0);
  CHECK((loaded.target.points() - pair.target.points()).norm() == 0.0);
}

TEST_CASE("read_manifest reports a missing or broken manifest") {
  TempDir dir("no_manifest");
  CHECK_THROWS_AS(read_manifest(dir.path()), IoError);
  write_text(dir.file("manifest.json"), "{ not json");
  CHECK_THROWS_AS(read_manifest(dir.path()), FormatError);
}
