#include "qimaps/map_text.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace qimaps {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// --- writer ------------------------------------------------------------------------------

void put(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void put_list(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        put(out, v[i]);
    }
    out += ']';
}

std::vector<double> flatten(const MatrixN& m) {
    std::vector<double> v;
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) v.push_back(m(i, j));
    }
    return v;
}

std::vector<double> flatten(const VectorN& x) { return {x.coords().begin(), x.coords().end()}; }

std::vector<double> flatten(const AngleProfile& p) {
    std::vector<double> v;
    for (const auto& k : p.knots()) {
        v.push_back(k.r);
        v.push_back(k.value);
        v.push_back(k.slope);
    }
    return v;
}

void write(std::string& out, const PLMap& f) {
    const Triangulation& t = f.triangulation();
    out += "plmap(" + std::to_string(t.dim()) + ',';
    put(out, t.lo());
    out += ',';
    put(out, t.hi());
    out += ',' + std::to_string(t.resolution()) + ',' + (f.boundary_fixed() ? "1" : "0") + ',';
    std::vector<double> images;
    for (const VectorN& v : f.vertex_images()) {
        for (double c : v.coords()) images.push_back(c);
    }
    put_list(out, images);
    out += ')';
}

void write(std::string& out, const SphereMap& s) {
    std::visit(overloaded{
                   [&](const SphereMap::Orthogonal& o) {
                       out += "orthogonal(" + std::to_string(s.dim()) + ',';
                       put_list(out, flatten(o.r));
                       out += ')';
                   },
                   [&](const SphereMap::Latitude& l) {
                       out += "latitude(";
                       put(out, l.beta);
                       out += ',';
                       put_list(out, flatten(l.axis));
                       out += ')';
                   },
                   [&](const SphereMap::Conjugated& c) {
                       out += "conjugated(" + std::to_string(s.dim()) + ',';
                       put_list(out, flatten(c.r));
                       out += ',';
                       write(out, c.inner);
                       out += ')';
                   },
                   [&](const SphereMap::Composed& c) {
                       out += "scompose(" + std::to_string(s.dim());
                       for (const SphereMap& p : c.parts) {
                           out += ',';
                           write(out, p);
                       }
                       out += ')';
                   },
                   [&](const SphereMap::Inverted& i) {
                       out += "sinverse(";
                       write(out, i.inner);
                       out += ')';
                   },
               },
               s.node().v);
}

void write(std::string& out, const DiskMap& d) {
    std::visit(overloaded{
                   [&](const DiskMap::Twist& t) {
                       out += "twist(" + std::to_string(d.dim()) + ',' + std::to_string(t.i) + ',' +
                              std::to_string(t.j) + ',';
                       put_list(out, flatten(t.theta));
                       out += ')';
                   },
                   [&](const DiskMap::Pl& p) {
                       out += "pldisk(";
                       write(out, p.map);
                       out += ')';
                   },
                   [&](const DiskMap::Composed& c) {
                       out += "dcompose(" + std::to_string(d.dim());
                       for (const DiskMap& p : c.parts) {
                           out += ',';
                           write(out, p);
                       }
                       out += ')';
                   },
                   [&](const DiskMap::Inverted& i) {
                       out += "dinverse(";
                       write(out, i.inner);
                       out += ')';
                   },
               },
               d.node().v);
}

void write(std::string& out, const SpiralProfile& p) {
    std::visit(overloaded{
                   [&](const SpiralProfile::Constant& c) {
                       out += "constant(" + std::to_string(p.dim()) + ',';
                       put_list(out, flatten(c.a));
                       out += ')';
                   },
                   [&](const SpiralProfile::LogSpiral& l) {
                       out += "log_spiral(" + std::to_string(p.dim()) + ',' + std::to_string(l.i) + ',' +
                              std::to_string(l.j) + ',';
                       put(out, l.c);
                       out += ')';
                   },
                   [&](const SpiralProfile::Cutoff& c) {
                       out += "cutoff(" + std::to_string(p.dim()) + ',' + std::to_string(c.i) + ',' +
                              std::to_string(c.j) + ',';
                       put_list(out, flatten(c.theta));
                       out += ')';
                   },
               },
               p.node());
}

void write(std::string& out, const MapExpr& m) {
    std::visit(overloaded{
                   [&](const MapExpr::Identity&) { out += "identity(" + std::to_string(m.dim()) + ')'; },
                   [&](const MapExpr::Affine& a) {
                       out += "affine(" + std::to_string(m.dim()) + ',';
                       put_list(out, flatten(a.m));
                       out += ',';
                       put_list(out, flatten(a.b));
                       out += ')';
                   },
                   [&](const MapExpr::RadialExt& r) {
                       out += "radial(";
                       write(out, r.phi);
                       out += ')';
                   },
                   [&](const MapExpr::Psi& p) {
                       out += "psi(";
                       write(out, p.g);
                       out += ')';
                   },
                   [&](const MapExpr::PhiTranslated& p) {
                       out += p.uniform ? "phi_uniform(" : "phi_list(";
                       for (std::size_t i = 0; i < p.gs.size(); ++i) {
                           if (i) out += ',';
                           write(out, p.gs[i]);
                       }
                       out += ')';
                   },
                   [&](const MapExpr::Product& p) {
                       out += "product(";
                       write(out, p.f);
                       out += ',';
                       write(out, p.g);
                       out += ')';
                   },
                   [&](const MapExpr::Spiral& s) {
                       out += "spiral(";
                       write(out, s.profile);
                       out += ')';
                   },
                   [&](const MapExpr::Pl& p) {
                       out += "pl(";
                       write(out, p.map);
                       out += ')';
                   },
                   [&](const MapExpr::Compose& c) {
                       out += "compose(";
                       for (std::size_t i = 0; i < c.parts.size(); ++i) {
                           if (i) out += ',';
                           write(out, c.parts[i]);
                       }
                       out += ')';
                   },
                   [&](const MapExpr::Inverse& i) {
                       out += "inverse(";
                       write(out, i.inner);
                       out += ')';
                   },
               },
               m.node().v);
}

// --- parser ------------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    MapExpr map() {
        const std::size_t at = skip();
        const std::string name = ident();
        expect('(');
        if (name == "identity") {
            const int n = integer();
            expect(')');
            return MapExpr::identity(n);
        }
        if (name == "affine") {
            const int n = integer();
            expect(',');
            const MatrixN m = matrix(n);
            expect(',');
            const VectorN b = vector(n);
            expect(')');
            return MapExpr::affine(m, b);
        }
        if (name == "radial") return close(radial_extension(sphere()));
        if (name == "psi") return close(disk_replication(disk()));
        if (name == "phi_uniform") return close(translated_replication_uniform(disk()));
        if (name == "phi_list") {
            std::vector<DiskMap> gs{disk()};
            while (accept(',')) gs.push_back(disk());
            expect(')');
            return translated_replication(std::move(gs));
        }
        if (name == "product") {
            const MapExpr f = map();
            expect(',');
            const MapExpr g = map();
            expect(')');
            return product_map(f, g);
        }
        if (name == "spiral") return close(spiral_map(profile()));
        if (name == "pl") return close(pl_map(plmap()));
        if (name == "compose") {
            std::vector<MapExpr> parts{map()};
            while (accept(',')) parts.push_back(map());
            expect(')');
            return compose_all(std::move(parts));
        }
        if (name == "inverse") {
            const MapExpr inner = map();
            expect(')');
            return inverse(inner);
        }
        fail(at, "unknown map constructor '" + name + "'");
    }

    SphereMap sphere() {
        const std::size_t at = skip();
        const std::string name = ident();
        expect('(');
        if (name == "orthogonal") {
            const int n = integer();
            expect(',');
            const MatrixN r = matrix(n);
            expect(')');
            return SphereMap::orthogonal(r);
        }
        if (name == "latitude") {
            const double beta = number();
            expect(',');
            const std::vector<double> axis = list();
            expect(')');
            if (axis.empty() || axis.size() > static_cast<std::size_t>(kMaxDim)) fail(at, "bad latitude axis");
            return SphereMap::latitude(beta, VectorN::from(axis));
        }
        if (name == "conjugated") {
            const int n = integer();
            expect(',');
            const MatrixN r = matrix(n);
            expect(',');
            const SphereMap inner = sphere();
            expect(')');
            return SphereMap::conjugated(r, inner);
        }
        if (name == "scompose") {
            const int n = integer();
            std::vector<SphereMap> parts;
            while (accept(',')) parts.push_back(sphere());
            expect(')');
            return SphereMap::composed(std::move(parts), n);
        }
        if (name == "sinverse") {
            const SphereMap inner = sphere();
            expect(')');
            return inner.inverse();
        }
        fail(at, "unknown sphere map constructor '" + name + "'");
    }

    DiskMap disk() {
        const std::size_t at = skip();
        const std::string name = ident();
        expect('(');
        if (name == "twist") {
            const int n = integer();
            expect(',');
            const int i = integer();
            expect(',');
            const int j = integer();
            expect(',');
            const AngleProfile theta = angle_profile();
            expect(')');
            return make_twist_disk_map(theta, i, j, n);
        }
        if (name == "pldisk") {
            const PLMap f = plmap();
            expect(')');
            return DiskMap::pl(f);
        }
        if (name == "dcompose") {
            const int n = integer();
            std::vector<DiskMap> parts;
            while (accept(',')) parts.push_back(disk());
            expect(')');
            return DiskMap::composed(std::move(parts), n);
        }
        if (name == "dinverse") {
            const DiskMap inner = disk();
            expect(')');
            return inner.inverse();
        }
        fail(at, "unknown disk map constructor '" + name + "'");
    }

    SpiralProfile profile() {
        const std::size_t at = skip();
        const std::string name = ident();
        expect('(');
        const int n = integer();
        expect(',');
        if (name == "constant") {
            const MatrixN a = matrix(n);
            expect(')');
            return SpiralProfile::constant(a);
        }
        const int i = integer();
        expect(',');
        const int j = integer();
        expect(',');
        if (name == "log_spiral") {
            const double c = number();
            expect(')');
            return SpiralProfile::log_spiral(c, i, j, n);
        }
        if (name == "cutoff") {
            const AngleProfile theta = angle_profile();
            expect(')');
            return SpiralProfile::cutoff(theta, i, j, n);
        }
        fail(at, "unknown spiral profile '" + name + "'");
    }

    PLMap plmap() {
        const std::size_t at = skip();
        if (ident() != "plmap") fail(at, "expected plmap(...)");
        expect('(');
        const int n = integer();
        expect(',');
        const double lo = number();
        expect(',');
        const double hi = number();
        expect(',');
        const int res = integer();
        expect(',');
        const int fixed = integer();
        expect(',');
        const std::size_t at_images = skip();
        const std::vector<double> flat = list();
        expect(')');
        if (n < 1 || n > kMaxPlDim) fail(at, "PL dimension out of range");
        Triangulation tri(n, lo, hi, res);
        if (flat.size() != tri.vertex_count() * static_cast<std::size_t>(n)) {
            fail(at_images, "expected " + std::to_string(tri.vertex_count() * static_cast<std::size_t>(n)) +
                                " image coordinates, got " + std::to_string(flat.size()));
        }
        std::vector<VectorN> images;
        images.reserve(tri.vertex_count());
        for (std::size_t v = 0; v < tri.vertex_count(); ++v) {
            images.push_back(VectorN::from({flat.data() + v * static_cast<std::size_t>(n), static_cast<std::size_t>(n)}));
        }
        return PLMap(std::move(tri), std::move(images), fixed != 0);
    }

    void finish() {
        const std::size_t at = skip();
        if (at != s_.size()) fail(at, "trailing characters");
    }

private:
    [[noreturn]] void fail(std::size_t at, const std::string& what) const {
        throw Error(Errc::parse_error, "offset " + std::to_string(at) + ": " + what);
    }

    std::size_t skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        const std::size_t at = skip();
        if (!accept(c)) fail(at, std::string("expected '") + c + "'");
    }

    std::string ident() {
        const std::size_t at = skip();
        while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (pos_ == at) fail(at, "expected a constructor name");
        return std::string(s_.substr(at, pos_ - at));
    }

    double number() {
        const std::size_t at = skip();
        std::size_t end = at;
        while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                   s_[end] == '-' || s_[end] == '+')) {
            ++end;
        }
        const std::string tok(s_.substr(at, end - at));
        char* stop = nullptr;
        const double v = std::strtod(tok.c_str(), &stop);
        if (tok.empty() || stop != tok.c_str() + tok.size() || !std::isfinite(v)) fail(at, "bad number '" + tok + "'");
        pos_ = end;
        return v;
    }

    int integer() {
        const std::size_t at = skip();
        const double v = number();
        if (v != std::floor(v) || std::abs(v) > 1e9) fail(at, "expected an integer");
        return static_cast<int>(v);
    }

    std::vector<double> list() {
        expect('[');
        std::vector<double> v;
        if (accept(']')) return v;
        do {
            v.push_back(number());
        } while (accept(','));
        expect(']');
        return v;
    }

    MatrixN matrix(int n) {
        const std::size_t at = skip();
        if (n < 1 || n > kMaxDim) fail(at, "dimension out of range");
        const std::vector<double> v = list();
        if (v.size() != static_cast<std::size_t>(n * n)) fail(at, "expected " + std::to_string(n * n) + " entries");
        return MatrixN::from_row_major(n, v);
    }

    VectorN vector(int n) {
        const std::size_t at = skip();
        const std::vector<double> v = list();
        if (v.size() != static_cast<std::size_t>(n)) fail(at, "expected " + std::to_string(n) + " entries");
        return VectorN::from(v);
    }

    AngleProfile angle_profile() {
        const std::size_t at = skip();
        const std::vector<double> v = list();
        if (v.size() % 3 != 0) fail(at, "angle profile needs (r, value, slope) triples");
        std::vector<AngleProfile::Knot> knots;
        for (std::size_t i = 0; i < v.size(); i += 3) knots.push_back({v[i], v[i + 1], v[i + 2]});
        return AngleProfile(std::move(knots));
    }

    MapExpr close(MapExpr m) {
        expect(')');
        return m;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string to_text(const MapExpr& m) {
    std::string out;
    write(out, m);
    return out;
}

std::string to_text(const SphereMap& s) {
    std::string out;
    write(out, s);
    return out;
}

std::string to_text(const DiskMap& d) {
    std::string out;
    write(out, d);
    return out;
}

std::string to_text(const SpiralProfile& p) {
    std::string out;
    write(out, p);
    return out;
}

std::string to_text(const PLMap& f) {
    std::string out;
    write(out, f);
    return out;
}

MapExpr parse_map(std::string_view text) {
    Parser p(text);
    MapExpr m = p.map();
    p.finish();
    return m;
}

SphereMap parse_sphere_map(std::string_view text) {
    Parser p(text);
    SphereMap s = p.sphere();
    p.finish();
    return s;
}

DiskMap parse_disk_map(std::string_view text) {
    Parser p(text);
    DiskMap d = p.disk();
    p.finish();
    return d;
}

}  // namespace qimaps
