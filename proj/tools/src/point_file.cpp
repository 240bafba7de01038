#include "lpcn_cli/point_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace lpcn::cli {

namespace {

bool parse_float(const std::string& token, float& out) {
  // strtof accepts the usual decimal and exponent forms; reject trailing junk.
  char* end = nullptr;
  out = std::strtof(token.c_str(), &end);
  return end != token.c_str() && *end == '\0';
}

}  // namespace

PointCloud read_point_file(std::istream& in, const std::string& source_name) {
  auto fail = [&](int line, const std::string& why) {
    return Error(source_name + ":" + std::to_string(line) + ": " + why);
  };

  std::string line;
  int line_no = 0;
  long long dims = -1;
  std::vector<PointRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      if (dims < 0) {
        std::string key;
        if (first == "#") ls >> key;
        else key = first.substr(1);
        if (key != "dims" || !(ls >> dims) || dims < 0) {
          throw fail(line_no, "expected header '# dims F'");
        }
      }
      continue;
    }
    if (dims < 0) throw fail(line_no, "missing '# dims F' header before the first point");

    std::vector<std::string> tokens{first};
    for (std::string t; ls >> t;) tokens.push_back(t);
    const auto want = static_cast<std::size_t>(3 + dims);
    if (tokens.size() != want) {
      throw fail(line_no, "expected " + std::to_string(want) + " columns, found " + std::to_string(tokens.size()));
    }
    PointRecord r;
    r.id = static_cast<PointId>(records.size());
    float v[3];
    for (int a = 0; a < 3; ++a) {
      if (!parse_float(tokens[a], v[a])) throw fail(line_no, "bad coordinate '" + tokens[a] + "'");
    }
    r.pos = Point3{v[0], v[1], v[2]};
    if (!is_finite(r.pos)) throw fail(line_no, "non-finite coordinate");
    r.feat.resize(static_cast<std::size_t>(dims));
    for (std::size_t f = 0; f < r.feat.size(); ++f) {
      if (!parse_float(tokens[3 + f], r.feat[f])) throw fail(line_no, "bad feature '" + tokens[3 + f] + "'");
    }
    records.push_back(std::move(r));
  }
  if (dims < 0) throw Error(source_name + ": missing '# dims F' header");
  if (records.empty()) throw Error(source_name + ": no points");
  return PointCloud(std::move(records), static_cast<std::size_t>(dims));
}

PointCloud load_point_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open point file '" + path + "'");
  return read_point_file(in, path);
}

void write_point_file(std::ostream& out, const PointCloud& cloud) {
  out << "# dims " << cloud.feat_dim() << '\n';
  char buf[32];
  auto put = [&](float v) {
    // Shortest representation that round-trips the float exactly.
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  for (const auto& r : cloud.records()) {
    put(r.pos.x);
    out << ' ';
    put(r.pos.y);
    out << ' ';
    put(r.pos.z);
    for (float f : r.feat) {
      out << ' ';
      put(f);
    }
    out << '\n';
  }
}

}  // namespace lpcn::cli
