#include "rpbie/patch_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace rpbie {

namespace {

// Bernstein basis values and derivatives in t in [0, 1].
void bernstein(int degree, double t, std::vector<double>& b, std::vector<double>& db) {
  b.assign(degree + 1, 0.0);
  db.assign(degree + 1, 0.0);
  // Degree d-1 basis first, then raise; derivative uses the lower basis.
  std::vector<double> lower(std::max(degree, 1), 0.0);
  b[0] = 1.0;
  for (int d = 1; d <= degree; ++d) {
    if (d == degree) std::copy(b.begin(), b.begin() + d, lower.begin());
    double saved = 0.0;
    for (int k = 0; k < d; ++k) {
      const double tmp = b[k];
      b[k] = saved + (1.0 - t) * tmp;
      saved = t * tmp;
    }
    b[d] = saved;
  }
  if (degree == 0) return;
  for (int k = 0; k <= degree; ++k) {
    const double left = (k > 0) ? lower[k - 1] : 0.0;
    const double right = (k < degree) ? lower[k] : 0.0;
    db[k] = degree * (left - right);
  }
}

class BezierMap final : public SurfaceMap {
 public:
  explicit BezierMap(BezierControlNet net) : net_(std::move(net)) {}

  SurfacePoint eval(double u, double v) const override {
    thread_local std::vector<double> bu, dbu, bv, dbv;
    bernstein(net_.degree_u, 0.5 * (u + 1.0), bu, dbu);
    bernstein(net_.degree_v, 0.5 * (v + 1.0), bv, dbv);
    SurfacePoint sp{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    const int nu = net_.degree_u + 1;
    for (int j = 0; j <= net_.degree_v; ++j) {
      for (int i = 0; i < nu; ++i) {
        const Vec3& p = net_.points[std::size_t(j * nu + i)];
        sp.x += (bu[i] * bv[j]) * p;
        sp.xu += (0.5 * dbu[i] * bv[j]) * p;
        sp.xv += (0.5 * bu[i] * dbv[j]) * p;
      }
    }
    return sp;
  }

 private:
  BezierControlNet net_;
};

struct Token {
  std::string_view text;
  int line;
};

class Tokenizer {
 public:
  Tokenizer(std::string_view text, std::string source) : source_(std::move(source)) {
    int line = 1;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == '\n') {
        ++line;
        ++pos;
      } else if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        const std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != '#') ++pos;
        tokens_.push_back({text.substr(start, pos - start), line});
      }
    }
  }

  bool done() const { return next_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[next_]; }

  [[noreturn]] void fail(const std::string& what, const std::string& context) const {
    std::ostringstream msg;
    msg << source_ << ":";
    if (next_ < tokens_.size()) msg << tokens_[next_].line;
    else msg << (tokens_.empty() ? 1 : tokens_.back().line);
    msg << ": " << context << ": " << what;
    throw ConfigError(msg.str());
  }

  std::string_view word(const std::string& context, const char* expected) {
    if (done()) fail(std::string("unexpected end of file, expected ") + expected, context);
    return tokens_[next_++].text;
  }

  template <class T>
  T number(const std::string& context, const char* field) {
    if (done()) fail(std::string("unexpected end of file, expected ") + field, context);
    const Token& tok = tokens_[next_];
    T value{};
    const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.text.data() + tok.text.size()) {
      fail("bad " + std::string(field) + " '" + std::string(tok.text) + "'", context);
    }
    ++next_;
    return value;
  }

  EdgeFlag flag(const std::string& context, const char* field) {
    if (done()) fail(std::string("unexpected end of file, expected ") + field, context);
    const std::string_view w = tokens_[next_].text;
    std::optional<EdgeFlag> f;
    if (w == "none") f = EdgeFlag::none;
    else if (w == "both") f = EdgeFlag::both_ends;
    else if (w == "low") f = EdgeFlag::low_end_only;
    else if (w == "high") f = EdgeFlag::high_end_only;
    if (!f) fail("bad " + std::string(field) + " '" + std::string(w) + "' (none|both|low|high)", context);
    ++next_;
    return *f;
  }

 private:
  std::string source_;
  std::vector<Token> tokens_;
  std::size_t next_ = 0;
};

// Samples the Jacobian on an interior grid; a degenerate patch is rejected.
void check_nondegenerate(const Patch& patch, const std::string& context) {
  double scale = 0.0;
  for (const Vec3& c : patch.corners()) scale = std::max(scale, c.norm());
  scale = std::max(scale, 1.0);
  constexpr int kSamples = 9;
  for (int j = 0; j < kSamples; ++j) {
    for (int i = 0; i < kSamples; ++i) {
      const double u = -1.0 + 2.0 * (i + 0.5) / kSamples;
      const double v = -1.0 + 2.0 * (j + 0.5) / kSamples;
      const SurfacePoint sp = patch.eval(u, v);
      const double jac = sp.xu.cross(sp.xv).norm();
      if (!(jac > 1e-12 * scale * scale)) {
        std::ostringstream msg;
        msg << context << ": degenerate parametrization (Jacobian " << jac << " at u=" << u << ", v=" << v
            << ")";
        throw GeometryError(msg.str());
      }
    }
  }
}

}  // namespace

std::shared_ptr<const SurfaceMap> make_bezier_map(BezierControlNet net) {
  if (net.degree_u < 0 || net.degree_v < 0 ||
      net.points.size() != std::size_t((net.degree_u + 1) * (net.degree_v + 1))) {
    throw ConfigError("Bezier control net size does not match its degrees");
  }
  return std::make_shared<BezierMap>(std::move(net));
}

PatchAtlas parse_patch_text(std::string_view text, const std::string& source_name) {
  Tokenizer tok(text, source_name);
  PatchAtlas atlas;

  if (tok.word("header", "'surface'") != "surface") tok.fail("expected 'surface closed|open'", "header");
  const std::string_view kind = tok.word("header", "closed|open");
  if (kind == "closed") atlas.closed = true;
  else if (kind == "open") atlas.closed = false;
  else tok.fail("surface kind must be 'closed' or 'open'", "header");

  int index = 0;
  while (!tok.done()) {
    const std::string context = "patch " + std::to_string(index);
    if (tok.word(context, "'patch'") != "patch") tok.fail("expected keyword 'patch'", context);
    BezierControlNet net;
    net.degree_u = tok.number<int>(context, "degree d_u");
    net.degree_v = tok.number<int>(context, "degree d_v");
    if (net.degree_u < 1 || net.degree_v < 1 || net.degree_u > 30 || net.degree_v > 30) {
      tok.fail("degrees must lie in [1, 30]", context);
    }
    const int count = (net.degree_u + 1) * (net.degree_v + 1);
    net.points.reserve(std::size_t(count));
    for (int c = 0; c < count; ++c) {
      const std::string field = "control point " + std::to_string(c) + " of " + std::to_string(count);
      if (!tok.done() && tok.peek().text == "patch") tok.fail("too few control points, got " + std::to_string(c) + " of " + std::to_string(count), context);
      const double x = tok.number<double>(context, field.c_str());
      const double y = tok.number<double>(context, field.c_str());
      const double z = tok.number<double>(context, field.c_str());
      net.points.emplace_back(x, y, z);
    }
    const EdgeFlag fu = tok.flag(context, "edge flag for u");
    const EdgeFlag fv = tok.flag(context, "edge flag for v");
    const int p = tok.number<int>(context, "grading order p");
    if ((fu != EdgeFlag::none || fv != EdgeFlag::none) && p < 2) tok.fail("grading order p must be >= 2", context);
    if (p < 1) tok.fail("grading order p must be positive", context);

    Patch patch(make_bezier_map(std::move(net)), fu, fv, std::max(p, 2));
    check_nondegenerate(patch, source_name + ": " + context);
    patch.id = index;
    atlas.patches.push_back(std::move(patch));
    ++index;
  }
  if (atlas.patches.empty()) tok.fail("no patches", "file");
  return atlas;
}

PatchAtlas load_patch_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open patch file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_patch_text(buf.str(), path.string());
}

std::string format_patch_text(const std::vector<PatchRecord>& records, bool closed) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "surface " << (closed ? "closed" : "open") << "\n";
  for (const auto& r : records) {
    out << "patch " << r.net.degree_u << " " << r.net.degree_v << "\n";
    for (const Vec3& p : r.net.points) out << "  " << p.x() << " " << p.y() << " " << p.z() << "\n";
    out << "  " << to_string(r.flag_u) << " " << to_string(r.flag_v) << "\n  " << r.p << "\n";
  }
  return out.str();
}

}  // namespace rpbie
