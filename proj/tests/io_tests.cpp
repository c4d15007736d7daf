#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lanecarto/errors.hpp"
#include "lanecarto/io.hpp"
#include "lanecarto/rng.hpp"
#include "test_support.hpp"

using namespace lanecarto;
using lanecarto::test::TempDir;

namespace {

LabelImage checker_image(int w, int h) {
  LabelImage img;
  img.width = w;
  img.height = h;
  img.labels.resize(static_cast<std::size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      img.labels[static_cast<std::size_t>(v) * w + u] =
          static_cast<std::uint8_t>((u + v) % kSemanticClassCount);
    }
  }
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("label png round trip preserves pixels and text chunks") {
  TempDir dir("label_png");
  LabelImage img = checker_image(37, 21);
  img.text = {{"cell_size", "0.1"}, {"note", "hello world"}};
  write_label_png(dir.file("img.png"), img);

  const LabelImage back = read_label_png(dir.file("img.png"));
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.labels == img.labels);
  REQUIRE(back.text.size() >= 2);
  bool found_note = false;
  for (const auto& [k, v] : back.text) {
    if (k == "note") {
      found_note = true;
      CHECK(v == "hello world");
    }
  }
  CHECK(found_note);
}

TEST_CASE("reading a missing or non-png file fails cleanly") {
  TempDir dir("bad_png");
  CHECK_THROWS_AS(read_label_png(dir.file("missing.png")), ParseError);
  write_text_file(dir.file("fake.png"), "this is not a png");
  CHECK_THROWS_AS(read_label_png(dir.file("fake.png")), ParseError);
}

TEST_CASE("bev png round trip preserves the grid registration") {
  TempDir dir("bev_png");
  BEVMap bev(0.1);
  Rng rng(12);
  for (int n = 0; n < 400; ++n) {
    const CellIndex c{static_cast<std::int32_t>(rng.below(90)) - 30,
                      static_cast<std::int32_t>(rng.below(70)) - 40};
    bev.add_vote(c, static_cast<SemanticClass>(1 + rng.below(kSemanticClassCount - 1)));
  }

  const BEVRaster raster = bev.to_raster();
  write_bev_png(dir.file("bev.png"), raster);
  const BEVRaster back = read_bev_png(dir.file("bev.png"));

  CHECK(back.origin == raster.origin);
  CHECK(back.width == raster.width);
  CHECK(back.height == raster.height);
  CHECK(back.cell_size == doctest::Approx(raster.cell_size).epsilon(1e-12));
  CHECK(back.labels == raster.labels);

  const BEVMap rebuilt = BEVMap::from_raster(back);
  bev.for_each_voted_cell([&](const CellIndex& c, const BEVMap::VoteRow&) {
    CHECK(rebuilt.label_at(c) == bev.label_at(c));
  });
}

TEST_CASE("frame png round trip preserves classes but not the timestamp") {
  TempDir dir("frame_png");
  SemanticFrame frame;
  frame.timestamp = 123.456;
  frame.width = 64;
  frame.height = 48;
  frame.classes.resize(64 * 48);
  Rng rng(9);
  for (auto& c : frame.classes) {
    c = static_cast<std::uint8_t>(rng.below(kSemanticClassCount));
  }

  write_frame_png(dir.file("frame.png"), frame);
  const SemanticFrame back = read_frame_png(dir.file("frame.png"));
  CHECK(back.width == frame.width);
  CHECK(back.height == frame.height);
  CHECK(back.classes == frame.classes);
  CHECK(back.timestamp == 0.0);
}

TEST_CASE("binary point clouds round trip at float precision") {
  TempDir dir("cloud_bin");
  Rng rng(77);
  std::vector<Vec3> cloud;
  for (int i = 0; i < 500; ++i) {
    cloud.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-2, 2)});
  }

  write_point_cloud(dir.file("c.bin"), cloud);
  const std::vector<Vec3> back = read_point_cloud(dir.file("c.bin"));
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(std::abs(back[i].x - cloud[i].x) < 1e-4);
    CHECK(std::abs(back[i].y - cloud[i].y) < 1e-4);
    CHECK(std::abs(back[i].z - cloud[i].z) < 1e-4);
  }

  // writing the same cloud twice gives identical bytes
  write_point_cloud(dir.file("c2.bin"), cloud);
  std::ifstream a(dir.file("c.bin"), std::ios::binary), b(dir.file("c2.bin"), std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(sa.substr(0, 8) == "LCPC0001");
}

TEST_CASE("csv point clouds round trip") {
  TempDir dir("cloud_csv");
  const std::vector<Vec3> cloud{{1.5, -2.25, 0.125}, {0, 0, 0}, {-10.5, 3.75, 1.0}};
  write_point_cloud(dir.file("c.csv"), cloud);
  const std::vector<Vec3> back = read_point_cloud(dir.file("c.csv"));
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(std::abs(back[i].x - cloud[i].x) < 1e-6);
    CHECK(std::abs(back[i].y - cloud[i].y) < 1e-6);
    CHECK(std::abs(back[i].z - cloud[i].z) < 1e-6);
  }
}

TEST_CASE("corrupt point cloud files fail with ParseError") {
  TempDir dir("cloud_bad");
  write_text_file(dir.file("bad_magic.bin"), "NOTLCPC0xxxxxxxxxxxxxxxx");
  CHECK_THROWS_AS(read_point_cloud(dir.file("bad_magic.bin")), ParseError);

  write_point_cloud(dir.file("ok.bin"), {{1, 2, 3}, {4, 5, 6}});
  std::ifstream in(dir.file("ok.bin"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  in.close();
  bytes.resize(bytes.size() - 5);  // truncate the last record
  std::ofstream out(dir.file("trunc.bin"), std::ios::binary);
  out << bytes;
  out.close();
  CHECK_THROWS_AS(read_point_cloud(dir.file("trunc.bin")), ParseError);

  CHECK_THROWS_AS(read_point_cloud(dir.file("absent.bin")), ParseError);
}

TEST_CASE("poses csv round trips doubles exactly") {
  TempDir dir("poses");
  Rng rng(31);
  std::vector<Pose> poses;
  for (int i = 0; i < 40; ++i) {
    Pose p;
    p.timestamp = i * 0.1 + rng.uniform01() * 1e-7;
    p.position = {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-1, 1)};
    p.yaw = rng.uniform(-kPi, kPi);
    p.pitch = rng.uniform(-0.1, 0.1);
    p.roll = rng.uniform(-0.1, 0.1);
    poses.push_back(p);
  }

  write_poses_csv(dir.file("poses.csv"), poses);
  const std::vector<Pose> back = read_poses_csv(dir.file("poses.csv"));
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(back[i].timestamp == poses[i].timestamp);
    CHECK(back[i].position.x == poses[i].position.x);
    CHECK(back[i].position.y == poses[i].position.y);
    CHECK(back[i].position.z == poses[i].position.z);
    CHECK(back[i].yaw == poses[i].yaw);
    CHECK(back[i].pitch == poses[i].pitch);
    CHECK(back[i].roll == poses[i].roll);
  }
}

TEST_CASE("malformed pose csv rows fail with ParseError") {
  TempDir dir("poses_bad");
  write_text_file(dir.file("bad.csv"),
                  "timestamp,x,y,z,yaw,pitch,roll\n1.0,2.0,3.0\n");
  CHECK_THROWS_AS(read_poses_csv(dir.file("bad.csv")), ParseError);
}

TEST_CASE("camera calibration round trips through text") {
  TempDir dir("camera");
  const CameraModel cam = CameraModel::forward_facing(200.0, 200.0, 160.0, 100.0,
                                                      {0.0, 0.0, 1.5});
  write_camera_txt(dir.file("camera.txt"), cam);
  const CameraModel back = read_camera_txt(dir.file("camera.txt"));

  CHECK(back.fx == doctest::Approx(cam.fx));
  CHECK(back.fy == doctest::Approx(cam.fy));
  CHECK(back.cx == doctest::Approx(cam.cx));
  CHECK(back.cy == doctest::Approx(cam.cy));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(back.rotation(r, c) == doctest::Approx(cam.rotation(r, c)).epsilon(1e-12));
    }
  }
  CHECK(back.translation.z == doctest::Approx(1.5));

  const Vec3 probe{3.0, -1.0, 0.5};
  const Vec3 via_cam = back.to_vehicle(back.to_camera(probe));
  CHECK(std::abs(via_cam.x - probe.x) < 1e-9);
  CHECK(std::abs(via_cam.y - probe.y) < 1e-9);
  CHECK(std::abs(via_cam.z - probe.z) < 1e-9);
}

TEST_CASE("camera files with a non-orthonormal rotation are rejected") {
  TempDir dir("camera_bad");
  write_text_file(dir.file("camera.txt"),
                  "fx=200\nfy=200\ncx=160\ncy=100\n"
                  "extrinsic=1 0 0 0 2 0 0 0 1 0 0 1.5\n");
  CHECK_THROWS_AS(read_camera_txt(dir.file("camera.txt")), ParseError);
}

TEST_CASE("read_text_file distinguishes missing files") {
  TempDir dir("text");
  CHECK_THROWS_AS(read_text_file(dir.file("nope.txt")), ParseError);
  write_text_file(dir.file("a.txt"), "alpha\nbeta");
  CHECK(read_text_file(dir.file("a.txt")) == "alpha\nbeta");
}

TEST_SUITE_END();
