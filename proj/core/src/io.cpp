#include "lanecarto/io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lanecarto/errors.hpp"
#include "lanecarto/semantics.hpp"

namespace lanecarto {

std::string_view semantic_class_name(SemanticClass c) {
  switch (c) {
    case SemanticClass::Unknown: return "unknown";
    case SemanticClass::DaCenter: return "da-center";
    case SemanticClass::DaLeft: return "da-left";
    case SemanticClass::DaLeftLeft: return "da-left-left";
    case SemanticClass::DaRight: return "da-right";
    case SemanticClass::DaRightRight: return "da-right-right";
    case SemanticClass::LmDashed: return "lm-dashed";
    case SemanticClass::LmSolid: return "lm-solid";
    case SemanticClass::Crosswalk: return "crosswalk";
    case SemanticClass::Curb: return "curb";
    case SemanticClass::StopLine: return "stop-line";
  }
  return "invalid";
}

const std::array<Rgb, kSemanticClassCount>& semantic_palette() {
  static const std::array<Rgb, kSemanticClassCount> palette = {{
      {0, 0, 0},        // unknown
      {90, 90, 90},     // da-center
      {110, 110, 150},  // da-left
      {130, 130, 200},  // da-left-left
      {110, 150, 110},  // da-right
      {130, 200, 130},  // da-right-right
      {230, 230, 60},   // lm-dashed
      {255, 255, 255},  // lm-solid
      {255, 140, 0},    // crosswalk
      {200, 70, 70},    // curb
      {255, 0, 0},      // stop-line
  }};
  return palette;
}

namespace {

struct FileCloser {
  std::FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw ParseError("trailing characters after " + what);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " from '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

void write_label_png(const std::string& path, const LabelImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.labels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw ValidationError("label image dimensions do not match the pixel buffer");
  }
  for (std::uint8_t v : image.labels) {
    if (v >= kSemanticClassCount) {
      throw ValidationError("label image contains a code outside the semantic palette");
    }
  }

  FileCloser file{std::fopen(path.c_str(), "wb")};
  if (!file.f) throw std::runtime_error("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error while writing " + path);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);

  png_color palette[kSemanticClassCount];
  const auto& rgb = semantic_palette();
  for (int i = 0; i < kSemanticClassCount; ++i) {
    palette[i].red = rgb[i].r;
    palette[i].green = rgb[i].g;
    palette[i].blue = rgb[i].b;
  }
  png_set_PLTE(png, info, palette, kSemanticClassCount);

  std::vector<png_text> chunks(image.text.size());
  for (std::size_t i = 0; i < image.text.size(); ++i) {
    chunks[i] = png_text{};
    chunks[i].compression = PNG_TEXT_COMPRESSION_NONE;
    chunks[i].key = const_cast<char*>(image.text[i].first.c_str());
    chunks[i].text = const_cast<char*>(image.text[i].second.c_str());
    chunks[i].text_length = image.text[i].second.size();
  }
  if (!chunks.empty()) png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));

  png_write_info(png, info);
  std::vector<png_bytep> rows(image.height);
  for (int r = 0; r < image.height; ++r) {
    rows[r] = const_cast<png_bytep>(image.labels.data() + static_cast<std::size_t>(r) * image.width);
  }
  png_write_image(png, rows.data());
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

LabelImage read_label_png(const std::string& path) {
  FileCloser file{std::fopen(path.c_str(), "rb")};
  if (!file.f) throw ParseError("cannot open: " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, file.f) != 8 || png_sig_cmp(header, 0, 8)) {
    throw ParseError("not a PNG file: " + path);
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("libpng error while reading " + path);
  }
  png_init_io(png, file.f);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_PALETTE && color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("expected an indexed or grayscale PNG: " + path);
  }
  if (depth < 8) png_set_packing(png);
  if (depth == 16) png_set_strip_16(png);
  png_read_update_info(png, info);

  LabelImage image;
  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.labels.resize(static_cast<std::size_t>(width) * height);

  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) {
    rows[r] = image.labels.data() + static_cast<std::size_t>(r) * width;
  }
  png_read_image(png, rows.data());

  png_textp texts = nullptr;
  int text_count = 0;
  png_get_text(png, info, &texts, &text_count);
  for (int i = 0; i < text_count; ++i) {
    image.text.emplace_back(texts[i].key ? texts[i].key : "",
                            texts[i].text ? texts[i].text : "");
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_bev_png(const std::string& path, const BEVRaster& raster) {
  LabelImage image;
  image.width = raster.width;
  image.height = raster.height;
  image.labels.resize(static_cast<std::size_t>(raster.width) * raster.height);
  // Flip vertically: raster row 0 is the minimum-j (southernmost) cell row,
  // image row 0 is the top of the picture.
  for (std::int32_t r = 0; r < raster.height; ++r) {
    const std::uint8_t* src = raster.labels.data() + static_cast<std::size_t>(r) * raster.width;
    std::uint8_t* dst =
        image.labels.data() + static_cast<std::size_t>(raster.height - 1 - r) * raster.width;
    std::memcpy(dst, src, raster.width);
  }
  image.text = {{"lanecarto:cell_size", format_double(raster.cell_size)},
                {"lanecarto:origin_i", std::to_string(raster.origin.i)},
                {"lanecarto:origin_j", std::to_string(raster.origin.j)}};
  write_label_png(path, image);
}

BEVRaster read_bev_png(const std::string& path) {
  const LabelImage image = read_label_png(path);
  BEVRaster raster;
  raster.width = image.width;
  raster.height = image.height;
  bool have_cell = false, have_i = false, have_j = false;
  for (const auto& [key, value] : image.text) {
    if (key == "lanecarto:cell_size") {
      raster.cell_size = parse_double(value, "cell_size");
      have_cell = true;
    } else if (key == "lanecarto:origin_i") {
      raster.origin.i = static_cast<std::int32_t>(parse_double(value, "origin_i"));
      have_i = true;
    } else if (key == "lanecarto:origin_j") {
      raster.origin.j = static_cast<std::int32_t>(parse_double(value, "origin_j"));
      have_j = true;
    }
  }
  if (!have_cell || !have_i || !have_j) {
    throw ParseError("missing lanecarto grid metadata in " + path);
  }
  if (!(raster.cell_size > 0.0)) throw ParseError("non-positive cell_size in " + path);
  raster.labels.resize(image.labels.size());
  for (std::int32_t r = 0; r < raster.height; ++r) {
    const std::uint8_t* src =
        image.labels.data() + static_cast<std::size_t>(raster.height - 1 - r) * raster.width;
    std::uint8_t* dst = raster.labels.data() + static_cast<std::size_t>(r) * raster.width;
    std::memcpy(dst, src, raster.width);
  }
  for (std::uint8_t v : raster.labels) {
    if (v >= kSemanticClassCount) throw ParseError("label code out of range in " + path);
  }
  return raster;
}

void write_frame_png(const std::string& path, const SemanticFrame& frame) {
  LabelImage image;
  image.width = frame.width;
  image.height = frame.height;
  image.labels = frame.classes;
  write_label_png(path, image);
}

SemanticFrame read_frame_png(const std::string& path) {
  const LabelImage image = read_label_png(path);
  for (std::uint8_t v : image.labels) {
    if (v >= kSemanticClassCount) throw ParseError("label code out of range in " + path);
  }
  SemanticFrame frame;
  frame.width = image.width;
  frame.height = image.height;
  frame.classes = image.labels;
  return frame;
}

namespace {
constexpr char kCloudMagic[8] = {'L', 'C', 'P', 'C', '0', '0', '0', '1'};

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

void write_point_cloud(const std::string& path, const std::vector<Vec3>& points) {
  if (has_suffix(path, ".csv")) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(9);
    for (const Vec3& p : points) out << p.x << ',' << p.y << ',' << p.z << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kCloudMagic, sizeof(kCloudMagic));
  for (const Vec3& p : points) {
    const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y),
                          static_cast<float>(p.z)};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Vec3> read_point_cloud(const std::string& path) {
  std::vector<Vec3> points;
  if (has_suffix(path, ".csv")) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split(line, ',');
      if (fields.size() != 3) throw ParseError("expected x,y,z in " + path + ": " + line);
      points.push_back({parse_double(fields[0], "x"), parse_double(fields[1], "y"),
                        parse_double(fields[2], "z")});
    }
    return points;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCloudMagic, sizeof(magic)) != 0) {
    throw ParseError("bad point-cloud magic in " + path);
  }
  float xyz[3];
  while (in.read(reinterpret_cast<char*>(xyz), sizeof(xyz))) {
    points.push_back({xyz[0], xyz[1], xyz[2]});
  }
  if (in.gcount() != 0) throw ParseError("truncated point-cloud record in " + path);
  return points;
}

void write_poses_csv(const std::string& path, const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "timestamp,x,y,z,yaw,pitch,roll\n";
  out << std::setprecision(17);
  for (const Pose& p : poses) {
    out << p.timestamp << ',' << p.position.x << ',' << p.position.y << ','
        << p.position.z << ',' << p.yaw << ',' << p.pitch << ',' << p.roll << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Pose> read_poses_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::vector<Pose> poses;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find("timestamp") != std::string::npos) continue;  // header
    }
    const auto fields = split(line, ',');
    if (fields.size() != 7) {
      throw ParseError("expected 7 pose fields in " + path + ": " + line);
    }
    Pose p;
    p.timestamp = parse_double(fields[0], "timestamp");
    p.position = {parse_double(fields[1], "x"), parse_double(fields[2], "y"),
                  parse_double(fields[3], "z")};
    p.yaw = parse_double(fields[4], "yaw");
    p.pitch = parse_double(fields[5], "pitch");
    p.roll = parse_double(fields[6], "roll");
    poses.push_back(p);
  }
  return poses;
}

void write_camera_txt(const std::string& path, const CameraModel& camera) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(17);
  out << "fx=" << camera.fx << "\nfy=" << camera.fy << "\ncx=" << camera.cx
      << "\ncy=" << camera.cy << "\nextrinsic=";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << camera.rotation(r, c) << ' ';
    const double t = r == 0 ? camera.translation.x
                     : r == 1 ? camera.translation.y
                              : camera.translation.z;
    out << t << (r == 2 ? "\n" : " ");
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CameraModel read_camera_txt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  CameraModel camera;
  bool have_fx = false, have_fy = false, have_cx = false, have_cy = false, have_ext = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value in " + path + ": " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "fx") {
      camera.fx = parse_double(value, "fx");
      have_fx = true;
    } else if (key == "fy") {
      camera.fy = parse_double(value, "fy");
      have_fy = true;
    } else if (key == "cx") {
      camera.cx = parse_double(value, "cx");
      have_cx = true;
    } else if (key == "cy") {
      camera.cy = parse_double(value, "cy");
      have_cy = true;
    } else if (key == "extrinsic") {
      std::istringstream vs(value);
      double v[12];
      for (double& x : v) {
        if (!(vs >> x)) throw ParseError("extrinsic needs 12 values in " + path);
      }
      double extra;
      if (vs >> extra) throw ParseError("extrinsic has more than 12 values in " + path);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) camera.rotation(r, c) = v[r * 4 + c];
      }
      camera.translation = {v[3], v[7], v[11]};
      have_ext = true;
    } else {
      throw ParseError("unknown camera key '" + key + "' in " + path);
    }
  }
  if (!have_fx || !have_fy || !have_cx || !have_cy || !have_ext) {
    throw ParseError("camera file missing required keys: " + path);
  }
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    throw ParseError("focal lengths must be positive in " + path);
  }
  if (camera.rotation.orthonormality_error() > 1e-6) {
    throw ParseError("extrinsic rotation is not orthonormal in " + path);
  }
  return camera;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lanecarto
