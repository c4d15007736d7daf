#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lanecarto/errors.hpp"
#include "lanecarto/skeleton.hpp"

// Minimal XML reader for the OSM subset: <node id lat lon/>, <way id> with
// <nd ref/> and <tag k v/> children. Everything else is skipped. Tracks line
// numbers so malformed documents produce actionable errors.

namespace lanecarto {

namespace {

struct XmlAttr {
  std::string name, value;
};

struct XmlElement {
  std::string name;
  std::vector<XmlAttr> attrs;
  bool self_closing = false;
  int line = 1;

  const std::string* attr(const std::string& n) const {
    for (const auto& a : attrs)
      if (a.name == n) return &a.value;
    return nullptr;
  }
};

class XmlScanner {
 public:
  explicit XmlScanner(const std::string& text) : text_(text) {}

  // Returns false at end of input. Fills `out` for start tags; end tags pop
  // the element stack internally.
  bool next_start_element(XmlElement& out) {
    while (true) {
      skip_until_lt();
      if (eof()) {
        if (!stack_.empty())
          fail("unexpected end of document inside <" + stack_.back() + ">");
        return false;
      }
      ++pos_;  // consume '<'
      if (peek() == '?') {  // declaration
        skip_until("?>");
        continue;
      }
      if (starts_with("!--")) {
        skip_until("-->");
        continue;
      }
      if (peek() == '!') {  // DOCTYPE, CDATA: skip to '>'
        skip_until(">");
        continue;
      }
      if (peek() == '/') {  // closing tag
        ++pos_;
        std::string name = read_name();
        skip_ws();
        expect('>');
        if (stack_.empty() || stack_.back() != name)
          fail("mismatched closing tag </" + name + ">");
        stack_.pop_back();
        continue;
      }
      out = XmlElement{};
      out.line = line_;
      out.name = read_name();
      if (out.name.empty()) fail("expected element name after '<'");
      read_attrs(out);
      if (!out.self_closing) stack_.push_back(out.name);
      return true;
    }
  }

  int depth() const { return static_cast<int>(stack_.size()); }
  int line() const { return line_; }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("xml parse error at line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  bool starts_with(const char* s) const {
    return text_.compare(pos_, std::char_traits<char>::length(s), s) == 0;
  }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }
  void skip_until_lt() {
    while (!eof() && text_[pos_] != '<') advance();
  }
  void skip_until(const char* marker) {
    std::size_t len = std::char_traits<char>::length(marker);
    while (!eof()) {
      if (text_.compare(pos_, len, marker) == 0) {
        for (std::size_t i = 0; i < len; ++i) advance();
        return;
      }
      advance();
    }
    fail(std::string("unterminated construct, expected '") + marker + "'");
  }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }
  void expect(char c) {
    if (eof() || text_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    advance();
  }
  std::string read_name() {
    std::string n;
    while (!eof()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.')
        n.push_back(c), advance();
      else
        break;
    }
    return n;
  }
  std::string decode_entities(const std::string& raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      auto semi = raw.find(';', i);
      std::string ent = semi == std::string::npos ? "" : raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else fail("unknown entity '&" + ent + ";'");
      i = semi;
    }
    return out;
  }
  void read_attrs(XmlElement& el) {
    while (true) {
      skip_ws();
      if (eof()) fail("unterminated start tag <" + el.name + ">");
      char c = text_[pos_];
      if (c == '>') {
        advance();
        return;
      }
      if (c == '/') {
        advance();
        expect('>');
        el.self_closing = true;
        return;
      }
      XmlAttr a;
      a.name = read_name();
      if (a.name.empty()) fail("expected attribute name in <" + el.name + ">");
      skip_ws();
      expect('=');
      skip_ws();
      char quote = peek();
      if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
      advance();
      std::string raw;
      while (!eof() && text_[pos_] != quote) {
        raw.push_back(text_[pos_]);
        advance();
      }
      if (eof()) fail("unterminated attribute value");
      advance();  // closing quote
      a.value = decode_entities(raw);
      el.attrs.push_back(std::move(a));
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::vector<std::string> stack_;
};

double parse_double_attr(const XmlElement& el, const std::string& name) {
  const std::string* v = el.attr(name);
  if (!v) throw ParseError("xml parse error at line " + std::to_string(el.line) +
                           ": <" + el.name + "> missing attribute '" + name + "'");
  char* end = nullptr;
  double d = std::strtod(v->c_str(), &end);
  if (end == v->c_str())
    throw ParseError("xml parse error at line " + std::to_string(el.line) +
                     ": bad number in attribute '" + name + "'");
  return d;
}

std::int64_t parse_id_attr(const XmlElement& el, const std::string& name) {
  const std::string* v = el.attr(name);
  if (!v) throw ParseError("xml parse error at line " + std::to_string(el.line) +
                           ": <" + el.name + "> missing attribute '" + name + "'");
  return std::strtoll(v->c_str(), nullptr, 10);
}

constexpr double deg2rad(double d) { return d * M_PI / 180.0; }

}  // namespace

RawRoadNetwork parse_osm(const std::string& xml_text, const OsmParseOptions& opts) {
  XmlScanner scanner(xml_text);
  XmlElement el;

  struct GeoNode {
    NodeId id;
    double lat, lon;
    bool geographic;  // false when x/y given directly
  };
  std::vector<GeoNode> geo_nodes;
  std::vector<RawRoadNetwork::Way> ways;

  std::int64_t current_way = -1;
  std::vector<NodeId> way_nodes;
  std::map<std::string, std::string> way_tags;
  int way_depth = -1;

  auto flush_way = [&]() {
    if (current_way < 0) return;
    RawRoadNetwork::Way w;
    w.id = current_way;
    w.nodes = way_nodes;
    auto ow = way_tags.find("oneway");
    w.oneway = ow != way_tags.end() && (ow->second == "yes" || ow->second == "true" || ow->second == "1");
    auto hw = way_tags.find("highway");
    w.highway_class = hw != way_tags.end() ? hw->second : "";
    bool drivable =
        hw != way_tags.end() &&
        std::find(opts.highway_whitelist.begin(), opts.highway_whitelist.end(),
                  hw->second) != opts.highway_whitelist.end();
    if (drivable && w.nodes.size() >= 2) ways.push_back(std::move(w));
    current_way = -1;
    way_nodes.clear();
    way_tags.clear();
  };

  while (scanner.next_start_element(el)) {
    if (way_depth >= 0 && scanner.depth() <= way_depth && el.name != "nd" && el.name != "tag") {
      flush_way();
      way_depth = -1;
    }
    if (el.name == "node") {
      GeoNode n;
      n.id = parse_id_attr(el, "id");
      if (el.attr("lat") && el.attr("lon")) {
        n.lat = parse_double_attr(el, "lat");
        n.lon = parse_double_attr(el, "lon");
        n.geographic = true;
      } else {
        n.lon = parse_double_attr(el, "x");
        n.lat = parse_double_attr(el, "y");
        n.geographic = false;
      }
      geo_nodes.push_back(n);
    } else if (el.name == "way") {
      flush_way();
      current_way = parse_id_attr(el, "id");
      way_depth = scanner.depth() - (el.self_closing ? 0 : 1);
    } else if (el.name == "nd" && current_way >= 0) {
      way_nodes.push_back(parse_id_attr(el, "ref"));
    } else if (el.name == "tag" && current_way >= 0) {
      const std::string* k = el.attr("k");
      const std::string* v = el.attr("v");
      if (k && v) way_tags[*k] = *v;
    }
  }
  flush_way();

  RawRoadNetwork net;
  bool any_geographic = std::any_of(geo_nodes.begin(), geo_nodes.end(),
                                    [](const GeoNode& n) { return n.geographic; });
  if (any_geographic && !geo_nodes.empty()) {
    double lat_lo = 1e9, lat_hi = -1e9, lon_lo = 1e9, lon_hi = -1e9;
    for (const auto& n : geo_nodes) {
      lat_lo = std::min(lat_lo, n.lat);
      lat_hi = std::max(lat_hi, n.lat);
      lon_lo = std::min(lon_lo, n.lon);
      lon_hi = std::max(lon_hi, n.lon);
    }
    const double lat0 = 0.5 * (lat_lo + lat_hi);
    const double lon0 = 0.5 * (lon_lo + lon_hi);
    const double r = opts.earth_radius_m;
    for (const auto& n : geo_nodes) {
      RawRoadNetwork::Node node;
      node.id = n.id;
      // equirectangular projection about the bounding-box centroid
      node.position.x = r * deg2rad(n.lon - lon0) * std::cos(deg2rad(lat0));
      node.position.y = r * deg2rad(n.lat - lat0);
      net.nodes.push_back(node);
    }
  } else {
    for (const auto& n : geo_nodes) {
      RawRoadNetwork::Node node;
      node.id = n.id;
      node.position = {n.lon, n.lat};  // x,y passed through
      net.nodes.push_back(node);
    }
  }

  std::set<NodeId> known;
  for (const auto& n : net.nodes) known.insert(n.id);
  for (const auto& w : ways)
    for (NodeId ref : w.nodes)
      if (!known.count(ref))
        throw ValidationError("way " + std::to_string(w.id) +
                              " references missing node " + std::to_string(ref));
  net.ways = std::move(ways);
  return net;
}

}  // namespace lanecarto
