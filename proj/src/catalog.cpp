#include "cforge/catalog.hpp"

#include <cmath>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "cforge/modes.hpp"

namespace cforge {

namespace {

const char* kCircle = R"(# Particle of mass m held on a circle of radius r by the multiplier coordinate q3.
model circle_particle
params m=1,positive r=1,positive
coords q1 q2 q3
lagrangian (1/2)*m*(v1^2 + v2^2) - (1/2)*q3*(q1^2 + q2^2 - r^2)
observable pi2 = p1^2 + p2^2
chart phi = atan2(q2, q1)
chart pi = sqrt(p1^2 + p2^2)
)";

const char* kGaugePair = R"(# Two coordinates that only enter through their sum.
model gauge_pair
params m=1,positive k=1
coords q1 q2
lagrangian (1/2)*m*(v1 + v2)^2 - (1/2)*k*(q1 + q2)^2
observable Q = q1 + q2
observable P = p1
)";

const char* kFreeParticle = R"(# Unconstrained particle in one dimension.
model free_particle
params m=1,positive
coords q1
lagrangian (1/2)*m*v1^2
observable P = p1
observable H = p1^2/(2*m)
)";

const char* kRelParticle = R"(# Free relativistic particle in proper-time parametrization.
model rel_particle
params m=1,positive
coords q0 q1 q2 q3
nonzero p0
metric diag(-1,1,1,1)
direct
parameter_time
h0 0
primary psi = (1/2)*(-p0^2 + p1^2 + p2^2 + p3^2 + m^2)
observable P1 = p1
observable P2 = p2
observable P3 = p3
observable Q1 = q1 + q0*p1*p0^(-1)
observable Q2 = q2 + q0*p2*p0^(-1)
observable Q3 = q3 + q0*p3*p0^(-1)
chart C = sign(-p0)
)";

// A1 = -(B/2) q2, A2 = (B/2) q1: constant magnetic field along the 3-axis.
const char* kRelParticleField = R"(# Charged relativistic particle in a constant magnetic field.
model rel_particle_field
params m=1,positive e=1 B=1
coords q0 q1 q2 q3
nonzero p0
metric diag(-1,1,1,1)
direct
parameter_time
h0 0
primary psi = (1/2)*(-p0^2 + (p1 - (1/2)*e*B*q2)^2 + (p2 + (1/2)*e*B*q1)^2 + p3^2 + m^2)
observable P0 = p0
observable P3 = p3
observable K1 = p1 + (1/2)*e*B*q2
observable K2 = p2 - (1/2)*e*B*q1
chart C = sign(-p0)
)";

struct Complex {
    Expr re, im;
};

Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

const VarTable& header_table(const std::string& header, std::optional<ModelSpec>& holder) {
    holder = parse_model(header + "direct\nh0 0\n");
    return std::get<DirectSpec>(*holder).header.table;
}

Expr named(const VarTable& t, const std::string& name) {
    auto v = t.lookup(name);
    if (!v) throw std::logic_error("catalog: missing variable " + name);
    return Expr::var(*v);
}

std::vector<double> initial_state(const std::string& source,
                                  const std::function<double(const std::string&, std::size_t)>& value) {
    auto model = load_model(source);
    const auto& t = model.table();
    std::vector<double> out;
    for (Var v : t.phase_vars()) out.push_back(value(t.name(v), out.size()));
    return out;
}

CatalogEntry fixed_entry(const std::string& name, const char* source, Golden g, DynamicsDefaults d) {
    CatalogEntry e;
    e.name = name;
    e.file_stem = name;
    e.source = source;
    e.golden = std::move(g);
    e.dynamics = std::move(d);
    return e;
}

CatalogEntry em_entry(int cutoff) {
    CatalogEntry e;
    e.name = "em_modes(" + std::to_string(cutoff) + ")";
    e.file_stem = "em_modes_" + std::to_string(cutoff);
    e.cutoff = cutoff;
    e.source = em_modes_source(cutoff);
    std::size_t modes = enumerate_modes(cutoff, 3).size();
    e.golden.constraints = 2 * modes - 1;
    e.golden.first_class = 2 * modes - 1;
    e.golden.generations = 2;
    e.golden.primary_multipliers.assign(modes, "free");
    e.dynamics.t_end = 1.0;
    e.dynamics.dt = 1e-2;
    e.dynamics.schedules = {"u=zero", "u=sin(1,1)"};
    e.dynamics.initial = initial_state(e.source, [](const std::string&, std::size_t i) {
        return 0.1 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    });
    return e;
}

CatalogEntry string_entry(int cutoff, int dim) {
    CatalogEntry e;
    e.name = "string_modes(" + std::to_string(cutoff) + (dim == 3 ? "" : "," + std::to_string(dim)) + ")";
    e.file_stem = "string_modes_" + std::to_string(cutoff) + (dim == 3 ? "" : "_" + std::to_string(dim));
    e.cutoff = cutoff;
    e.source = string_modes_source(cutoff, dim);
    std::size_t n = 2 * (2 * static_cast<std::size_t>(cutoff) + 1);
    e.golden.constraints = n;
    e.golden.first_class = n;
    e.golden.generations = 1;
    e.golden.primary_multipliers.assign(n, "free");
    e.dynamics.t_end = 1.0;
    e.dynamics.dt = 1e-2;
    e.dynamics.schedules = {"u=zero", "u=sin(1,1)"};
    // Null total momentum P = (1, 1, 0, ...) with small oscillator excitations.
    e.dynamics.initial = initial_state(e.source, [](const std::string& name, std::size_t i) {
        if (name == "pX0z" || name == "pX1z") return 1.0;
        if (name.size() > 2 && name.back() == '1' && name.find("p1") != std::string::npos)
            return 0.01 * std::cos(static_cast<double>(i));
        return 0.0;
    });
    return e;
}

int parse_cutoff(const std::string& s) {
    std::size_t used = 0;
    int k = std::stoi(s, &used);
    if (used != s.size() || k < 1) throw std::invalid_argument("bad cutoff '" + s + "'");
    return k;
}

}  // namespace

std::string em_modes_source(int cutoff) {
    std::ostringstream header;
    header << "# Maxwell field on a periodic box, Fourier modes with max-norm <= " << cutoff << ".\n"
           << "model em_modes_" << cutoff << "\nmodes " << cutoff << " dim 3\nfields A0 A1 A2 A3\n";
    std::optional<ModelSpec> holder;
    const VarTable& t = header_table(header.str(), holder);
    auto q = [&](int field, const Mode& m) { return named(t, mode_variable_name("A" + std::to_string(field), m)); };
    auto v = [&](int field, const Mode& m) {
        return named(t, "v" + mode_variable_name("A" + std::to_string(field), m));
    };
    const Expr half(make_rational(1, 2));
    Expr L;
    Mode zero;
    for (int i = 1; i <= 3; ++i) L += half * v(i, zero).pow(2);
    for (const auto& k : half_space_vectors(cutoff, 3)) {
        Mode c{Mode::Cos, k}, s{Mode::Sin, k};
        for (int i = 1; i <= 3; ++i) {
            Expr ki(k[i - 1]);
            Expr f0c = v(i, c) - ki * q(0, s);
            Expr f0s = v(i, s) + ki * q(0, c);
            L += half * (f0c.pow(2) + f0s.pow(2));
        }
        for (int i = 1; i <= 3; ++i)
            for (int j = i + 1; j <= 3; ++j) {
                Expr ki(k[i - 1]), kj(k[j - 1]);
                Expr fc = ki * q(j, s) - kj * q(i, s);
                Expr fs = kj * q(i, c) - ki * q(j, c);
                L -= half * (fc.pow(2) + fs.pow(2));
            }
    }
    std::ostringstream out;
    out << header.str() << "lagrangian " << to_string(L, t) << "\n";
    for (int i = 1; i <= 3; ++i) out << "observable E" << i << "z = pA" << i << "z\n";
    // Transverse field strengths of the k = (0, 0, 1) mode.
    out << "observable F13c = -A1czzp1\nobservable F23c = -A2czzp1\n";
    return out.str();
}

std::string string_modes_source(int cutoff, int dim) {
    std::ostringstream header;
    header << "# Closed string, right- and left-moving constraint modes with |k| <= " << cutoff << ".\n"
           << "model string_modes_" << cutoff << (dim == 3 ? "" : "_" + std::to_string(dim)) << "\n"
           << "params pi=245850922/78256779,positive\nmodes " << cutoff << "\nfields";
    for (int mu = 0; mu < dim; ++mu) header << " X" << mu;
    header << "\nmetric diag(-1";
    for (int mu = 1; mu < dim; ++mu) header << ",1";
    header << ")\nmode_bracket 2*pi pi\n";
    std::optional<ModelSpec> holder;
    const VarTable& t = header_table(header.str(), holder);
    const Expr half(make_rational(1, 2));

    // a_mu(k) = (p(k) + i k q_mu(k)) / 2 and b with the opposite sign; real
    // parts live on the cosine variables, imaginary parts on the sine ones.
    auto mode = [&](int mu, int k, int sign) -> Complex {
        std::string f = "X" + std::to_string(mu);
        if (k == 0) return {half * named(t, "p" + f + "z"), Expr()};
        int ak = std::abs(k);
        std::string c = mode_variable_name(f, Mode{Mode::Cos, {ak}});
        std::string s = mode_variable_name(f, Mode{Mode::Sin, {ak}});
        Expr eta(mu == 0 ? -1 : 1);
        Expr kk(sign * ak);
        Complex z{half * (named(t, "p" + c) - kk * eta * named(t, s)),
                  half * (named(t, "p" + s) + kk * eta * named(t, c))};
        if (k < 0) z.im = -z.im;
        return z;
    };
    Expr inv2pi = half * named(t, "pi").inverse_monomial();
    std::ostringstream body;
    for (int sign : {1, -1}) {
        const char* tag = sign > 0 ? "phip" : "phim";
        for (int k = 0; k <= cutoff; ++k) {
            Complex sum;
            for (int l = k - cutoff; l <= cutoff; ++l) {
                if (std::abs(k - l) > cutoff) continue;
                for (int mu = 0; mu < dim; ++mu) {
                    Complex prod = mode(mu, l, sign) * mode(mu, k - l, sign);
                    Expr eta(mu == 0 ? -1 : 1);
                    sum.re += eta * prod.re;
                    sum.im += eta * prod.im;
                }
            }
            body << "primary " << tag << "r" << k << "[" << k << "] = " << to_string(inv2pi * sum.re, t) << "\n";
            if (k > 0)
                body << "primary " << tag << "i" << k << "[" << k << "] = " << to_string(inv2pi * sum.im, t) << "\n";
        }
    }
    std::ostringstream out;
    out << header.str() << "window " << cutoff / 2 << "\ndirect\nparameter_time\nh0 0\n" << body.str();
    for (int mu = 0; mu < dim; ++mu) out << "observable P" << mu << " = pX" << mu << "z\n";
    return out.str();
}

std::vector<std::string> builtin_names() {
    return {"circle_particle", "gauge_pair", "free_particle", "rel_particle", "rel_particle_field",
            "em_modes(K)",     "string_modes(K)", "string_modes(K,D)"};
}

CatalogEntry builtin(const std::string& name) {
    if (name == "circle_particle") {
        DynamicsDefaults d;
        d.t_end = 2 * M_PI;
        d.dt = 1e-3;
        d.initial = {1, 0, 0, 1, 1, 0};
        return fixed_entry(name, kCircle, {4, 0, 4, 4, {"fixed"}}, d);
    }
    if (name == "gauge_pair") {
        DynamicsDefaults d{5.0, 1e-2, {0.3, 0.5, 0.2, 0.5}, {"u=zero", "u=sin(1,1)", "u=step(1,0,2)"}};
        return fixed_entry(name, kGaugePair, {1, 1, 0, 1, {"free"}}, d);
    }
    if (name == "free_particle") {
        DynamicsDefaults d{10.0, 1e-2, {0.1, 0.7}, {}};
        return fixed_entry(name, kFreeParticle, {0, 0, 0, 1, {}}, d);
    }
    if (name == "rel_particle") {
        DynamicsDefaults d{3.0, 1e-2, {0, -1.2, 0, 0.3, 0, 0.4, 0, 0}, {"u=zero", "u=sin(1,1)", "u=step(1,0,2)"}};
        return fixed_entry(name, kRelParticle, {1, 1, 0, 1, {"free"}}, d);
    }
    if (name == "rel_particle_field") {
        DynamicsDefaults d{3.0, 1e-2, {0, -1.2, 0.1, 0.3, -0.2, 0.4, 0, 0.1}, {"u=zero", "u=sin(1,1)", "u=step(1,0,2)"}};
        return fixed_entry(name, kRelParticleField, {1, 1, 0, 1, {"free"}}, d);
    }
    static const std::regex em(R"(em_modes\((\d+)\))"), str(R"(string_modes\((\d+)(?:,(\d+))?\))");
    std::smatch m;
    if (std::regex_match(name, m, em)) return em_entry(parse_cutoff(m[1]));
    if (std::regex_match(name, m, str)) return string_entry(parse_cutoff(m[1]), m[2].matched ? parse_cutoff(m[2]) : 3);
    std::string list;
    for (const auto& n : builtin_names()) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown builtin model '" + name + "'; valid names: " + list);
}

std::vector<CatalogEntry> shipped_entries() {
    std::vector<CatalogEntry> out;
    for (const char* n : {"circle_particle", "gauge_pair", "free_particle", "rel_particle", "rel_particle_field",
                          "em_modes(1)", "em_modes(2)", "string_modes(4)"})
        out.push_back(builtin(n));
    return out;
}

}  // namespace cforge
