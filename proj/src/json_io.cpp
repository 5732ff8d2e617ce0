#include "hpnet/json_io.hpp"

#include <fstream>
#include <sstream>

namespace hpnet {

ordered_json num(double x) { return round12(x); }

ordered_json num_array(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(round12(x));
    return a;
}

NormalSystem system_from_json(const ordered_json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "cps") {
        for (auto& [k, v] : j.items())
            if (k != "kind" && k != "m1" && k != "m2")
                throw std::invalid_argument("system config: unknown key '" + k + "'");
        return NormalSystem::cps(j.at("m1").get<double>(), j.at("m2").get<double>());
    }
    if (kind == "linear") {
        for (auto& [k, v] : j.items())
            if (k != "kind" && k != "c1" && k != "c2" && k != "c0")
                throw std::invalid_argument("system config: unknown key '" + k + "'");
        return NormalSystem::linear(j.at("c1").get<double>(), j.at("c2").get<double>(),
                                    j.value("c0", 0.0));
    }
    if (kind == "tabulated") {
        for (auto& [k, v] : j.items())
            if (k != "kind" && k != "r1" && k != "r2" && k != "theta")
                throw std::invalid_argument("system config: unknown key '" + k + "'");
        auto r1 = j.at("r1"), r2 = j.at("r2");
        NormalSystem::Tabulated t;
        t.r1_min = r1.at(0).get<double>();
        t.r1_max = r1.at(1).get<double>();
        t.n1 = r1.at(2).get<int>();
        t.r2_min = r2.at(0).get<double>();
        t.r2_max = r2.at(1).get<double>();
        t.n2 = r2.at(2).get<int>();
        t.values = j.at("theta").get<std::vector<double>>();
        return NormalSystem::tabulated(std::move(t));
    }
    throw std::invalid_argument("system config: unknown kind '" + kind + "'");
}

ordered_json system_to_json(const NormalSystem& s) {
    ordered_json j;
    if (const auto* c = s.as_cps()) {
        j["kind"] = "cps";
        j["m1"] = num(c->m1);
        j["m2"] = num(c->m2);
    } else {
        j["kind"] = "system";
        j["A"] = num(s.lower_bound_A());
        j["B"] = num(s.upper_bound_B());
    }
    return j;
}

ordered_json curve_to_json(const Curve& c) {
    ordered_json j;
    std::vector<double> x(c.size()), y(c.size());
    for (int i = 0; i < c.size(); ++i) {
        x[i] = c.z[i].real();
        y[i] = c.z[i].imag();
    }
    j["s"] = num_array(c.s);
    j["x"] = num_array(x);
    j["y"] = num_array(y);
    j["phi"] = num_array(c.phi);
    return j;
}

Curve curve_from_json(const ordered_json& j) {
    Curve c;
    c.s = j.at("s").get<std::vector<double>>();
    auto x = j.at("x").get<std::vector<double>>();
    auto y = j.at("y").get<std::vector<double>>();
    c.phi = j.at("phi").get<std::vector<double>>();
    if (x.size() != c.s.size() || y.size() != c.s.size() || c.phi.size() != c.s.size())
        throw std::invalid_argument("curve json: array lengths differ");
    c.z.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) c.z[i] = {x[i], y[i]};
    return c;
}

std::string curve_to_csv(const Curve& c) {
    std::ostringstream out;
    out << "s,x,y,phi\n";
    for (int i = 0; i < c.size(); ++i)
        out << fmt12(c.s[i]) << ',' << fmt12(c.z[i].real()) << ',' << fmt12(c.z[i].imag()) << ','
            << fmt12(c.phi[i]) << '\n';
    return out.str();
}

ordered_json grid_to_json(const CharGrid& g) {
    ordered_json j;
    j["t1"] = num_array(g.t1);
    j["t2"] = num_array(g.t2);
    ordered_json xs = ordered_json::array(), ys = ordered_json::array(),
                 st = ordered_json::array();
    for (int i = 0; i < g.n1(); ++i) {
        ordered_json xr = ordered_json::array(), yr = ordered_json::array(),
                     sr = ordered_json::array();
        for (int jj = 0; jj < g.n2(); ++jj) {
            xr.push_back(round12(g.at(i, jj).real()));
            yr.push_back(round12(g.at(i, jj).imag()));
            sr.push_back(static_cast<int>(g.st(i, jj)));
        }
        xs.push_back(xr);
        ys.push_back(yr);
        st.push_back(sr);
    }
    j["x"] = xs;
    j["y"] = ys;
    j["R1_of_t2"] = num_array(g.r1_of_t2);
    j["R2_of_t1"] = num_array(g.r2_of_t1);
    j["status"] = st;
    j["folds"] = g.folds;
    return j;
}

std::string grid_to_csv(const CharGrid& g) {
    std::ostringstream out;
    out << "i,j,t1,t2,x,y,R1,R2,status\n";
    for (int i = 0; i < g.n1(); ++i)
        for (int jj = 0; jj < g.n2(); ++jj)
            out << i << ',' << jj << ',' << fmt12(g.t1[i]) << ',' << fmt12(g.t2[jj]) << ','
                << fmt12(g.at(i, jj).real()) << ',' << fmt12(g.at(i, jj).imag()) << ','
                << fmt12(g.r1_of_t2[jj]) << ',' << fmt12(g.r2_of_t1[i]) << ','
                << static_cast<int>(g.st(i, jj)) << '\n';
    return out.str();
}

namespace {

struct SvgFrame {
    double x0, y0, x1, y1, scale;
};

SvgFrame svg_frame(double x0, double x1, double y0, double y1) {
    double w = std::max(x1 - x0, 1e-9), h = std::max(y1 - y0, 1e-9);
    double margin = 0.05 * std::max(w, h);
    return {x0 - margin, y0 - margin, x1 + margin, y1 + margin, 900.0 / std::max(w, h)};
}

void svg_open(std::ostringstream& out, const SvgFrame& f) {
    double w = (f.x1 - f.x0) * f.scale, h = (f.y1 - f.y0) * f.scale;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt12(w) << "\" height=\""
        << fmt12(h) << "\" viewBox=\"0 0 " << fmt12(w) << ' ' << fmt12(h) << "\">\n";
}

void svg_polyline(std::ostringstream& out, const SvgFrame& f, const std::vector<cplx>& pts,
                  const char* color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& p : pts)
        out << fmt12((p.real() - f.x0) * f.scale) << ',' << fmt12((f.y1 - p.imag()) * f.scale)
            << ' ';
    out << "\"/>\n";
}

}  // namespace

std::string grid_to_svg(const CharGrid& g) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j) {
            if (g.st(i, j) == NodeStatus::Unreached) continue;
            x0 = std::min(x0, g.at(i, j).real());
            x1 = std::max(x1, g.at(i, j).real());
            y0 = std::min(y0, g.at(i, j).imag());
            y1 = std::max(y1, g.at(i, j).imag());
        }
    SvgFrame f = svg_frame(x0, x1, y0, y1);
    std::ostringstream out;
    svg_open(out, f);
    int step1 = std::max(1, g.n1() / 60), step2 = std::max(1, g.n2() / 60);
    for (int i = 0; i < g.n1(); i += step1) {
        std::vector<cplx> pts;
        for (int j = 0; j < g.n2() && g.st(i, j) == NodeStatus::Valid; ++j) pts.push_back(g.at(i, j));
        if (pts.size() > 1) svg_polyline(out, f, pts, "#c43b3b");
    }
    for (int j = 0; j < g.n2(); j += step2) {
        std::vector<cplx> pts;
        for (int i = 0; i < g.n1() && g.st(i, j) == NodeStatus::Valid; ++i) pts.push_back(g.at(i, j));
        if (pts.size() > 1) svg_polyline(out, f, pts, "#2f5fad");
    }
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.st(i, j) == NodeStatus::Folded)
                out << "<circle cx=\"" << fmt12((g.at(i, j).real() - f.x0) * f.scale) << "\" cy=\""
                    << fmt12((f.y1 - g.at(i, j).imag()) * f.scale) << "\" r=\"1.5\" fill=\"#000\"/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string net_to_svg(const std::vector<TaggedCurve>& net) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& tc : net)
        for (const auto& p : tc.curve.z) {
            x0 = std::min(x0, p.real());
            x1 = std::max(x1, p.real());
            y0 = std::min(y0, p.imag());
            y1 = std::max(y1, p.imag());
        }
    SvgFrame f = svg_frame(x0, x1, y0, y1);
    std::ostringstream out;
    svg_open(out, f);
    for (const auto& tc : net) svg_polyline(out, f, tc.curve.z, tc.k == 1 ? "#2f5fad" : "#c43b3b");
    out << "</svg>\n";
    return out.str();
}

ordered_json tree_to_json(const NestedIntervalTree& t) {
    // full precision: the deep levels sit at similarity scales far below
    // twelve significant digits of the root coordinates
    ordered_json j;
    ordered_json levels = ordered_json::array();
    for (size_t lv = 0; lv < t.levels.size(); ++lv) {
        ordered_json l = ordered_json::array();
        for (const auto& I : t.levels[lv]) {
            ordered_json e;
            e["a"] = I.a;
            e["b"] = I.b;
            e["len"] = t.length_at(static_cast<int>(lv));
            l.push_back(e);
        }
        levels.push_back(l);
    }
    j["levels"] = levels;
    j["gamma"] = t.gamma;
    j["tau"] = t.tau;
    j["delta2"] = t.delta2;
    j["r1"] = t.r1;
    return j;
}

NestedIntervalTree tree_from_json(const ordered_json& j) {
    NestedIntervalTree t;
    for (const auto& lvl : j.at("levels")) {
        std::vector<Interval> v;
        double len = 0.0;
        for (const auto& e : lvl) {
            v.push_back({e.at("a").get<double>(), e.at("b").get<double>()});
            len = e.contains("len") ? e.at("len").get<double>() : v.back().length();
        }
        t.levels.push_back(std::move(v));
        t.level_length.push_back(len);
    }
    t.gamma = j.at("gamma").get<double>();
    t.tau = j.at("tau").get<double>();
    t.delta2 = j.value("delta2", 0.0);
    t.r1 = j.value("r1", 0.0);
    return t;
}

ordered_json estimate_to_json(const DimensionEstimate& e) {
    ordered_json j;
    j["slope"] = num(e.slope);
    j["intercept"] = num(e.intercept);
    j["r_squared"] = num(e.r_squared);
    j["scales"] = num_array(e.scales_used);
    ordered_json counts = ordered_json::array();
    for (long c : e.counts) counts.push_back(c);
    j["counts"] = counts;
    j["degenerate_fit"] = e.degenerate_fit;
    return j;
}

ordered_json audit_to_json(const BoundAuditReport& r) {
    ordered_json j;
    j["product_checked"] = r.product_checked;
    j["product_failed"] = r.product_failed;
    j["worst_product"] = num(r.worst_product);
    j["worst_product_at"] = ordered_json::array({num(r.worst_product_at.real()),
                                                 num(r.worst_product_at.imag())});
    j["diam_checked"] = r.diam_checked;
    j["diam_failed"] = r.diam_failed;
    j["worst_diam_ratio"] = num(r.worst_diam_ratio);
    j["eta_measured"] = num(r.eta_measured);
    j["eta_prime_measured"] = num(r.eta_prime_measured);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hpnet
