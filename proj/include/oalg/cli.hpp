#pragma once

#include "oalg/aialg.hpp"
#include "oalg/choquet.hpp"
#include "oalg/error.hpp"
#include "oalg/finite_cstar.hpp"
#include "oalg/intertwine.hpp"
#include "oalg/ncpoly.hpp"
#include "oalg/supernatural.hpp"

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oalg::cli {

constexpr const char* kJobTag = "oalg-job/1";
constexpr const char* kReportTag = "oalg-report/1";

struct ParseFailure : Error {
    explicit ParseFailure(const std::string& what) : Error("parse: " + what) {}
};

struct JobDocument {
    std::string verb;
    std::map<std::string, std::string> kv;

    const std::string& need(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseFailure("missing field " + key);
        return it->second;
    }
    std::string get(const std::string& key, const std::string& dflt) const {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : it->second;
    }
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : std::stoull(it->second);
    }
};

// exit statuses: 0 success, 1 property violation, 2 parse error, 3 search exhausted
struct Report {
    std::string verb;
    int status = 0;
    std::vector<std::string> lines;

    void put(const std::string& k, const std::string& v) { lines.push_back(k + "=" + v); }
};

inline std::string dstr(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string report_str(const Report& r) {
    std::string s = std::string(kReportTag) + "\n";
    s += "verb=" + r.verb + "\n";
    s += "status=" + std::to_string(r.status) + "\n";
    for (const auto& l : r.lines) s += l + "\n";
    return s;
}

inline JobDocument parse_job(std::istream& in) {
    JobDocument doc;
    std::string line;
    if (!std::getline(in, line) || line != kJobTag) throw ParseFailure("missing schema tag");
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseFailure("bad line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "verb") doc.verb = val;
        else doc.kv[key] = val;
    }
    if (doc.verb.empty()) throw ParseFailure("missing verb");
    return doc;
}

// ---------------------------------------------------------------------------
// Field codecs
// ---------------------------------------------------------------------------

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline std::vector<Rat> parse_rats(const std::string& s) {
    std::vector<Rat> out;
    for (const auto& tok : split(s, ','))
        if (!tok.empty()) out.push_back(parse_rat(tok));
    return out;
}

inline std::string rats_str(const std::vector<Rat>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += rat_str(v[i]);
    }
    return s;
}

/// Piecewise-linear literal: x:y pairs joined by commas, e.g. 0:0,1/2:1,1:0
inline PLFunc parse_plfunc(const std::string& s) {
    std::vector<Rat> xs, ys;
    for (const auto& tok : split(s, ',')) {
        auto c = tok.find(':');
        if (c == std::string::npos) throw ParseFailure("bad breakpoint: " + tok);
        xs.push_back(parse_rat(tok.substr(0, c)));
        ys.push_back(parse_rat(tok.substr(c + 1)));
    }
    return PLFunc(std::move(xs), std::move(ys));
}

inline std::string plfunc_str(const PLFunc& f) {
    std::string s;
    for (std::size_t i = 0; i < f.xs.size(); ++i) {
        if (i) s += ',';
        s += rat_str(f.xs[i]) + ":" + rat_str(f.ys[i]);
    }
    return s;
}

/// Row-stochastic map literal: rows joined by ';', entries by ','.
inline OrderUnitMap parse_oumap(const std::string& s) {
    auto rows = split(s, ';');
    if (rows.empty()) throw ParseFailure("empty map");
    auto first = parse_rats(rows[0]);
    OrderUnitMap m(rows.size(), first.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto r = parse_rats(rows[i]);
        if (r.size() != m.cols) throw ParseFailure("ragged map rows");
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = r[j];
    }
    return m;
}

inline std::string oumap_str(const OrderUnitMap& m) {
    std::string s;
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (i) s += ';';
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j) s += ',';
            s += rat_str(m(i, j));
        }
    }
    return s;
}

/// Matrix tuple literal: matrices joined by '|', rows by ';', entries by
/// spaces, each entry a complex rational re+imi.
inline RatMatrixTuple parse_rtuple(const std::string& s, std::size_t dim) {
    RatMatrixTuple out;
    out.dim = dim;
    for (const auto& ms : split(s, '|')) {
        RatMat m(dim, dim);
        auto rows = split(ms, ';');
        if (rows.size() != dim) throw ParseFailure("matrix row count");
        for (std::size_t i = 0; i < dim; ++i) {
            std::istringstream es(rows[i]);
            std::string tok;
            std::size_t j = 0;
            while (es >> tok) {
                if (j >= dim) throw ParseFailure("matrix column count");
                m(i, j++) = parse_ratcx(tok);
            }
            if (j != dim) throw ParseFailure("matrix column count");
        }
        out.entries.push_back(std::move(m));
    }
    if (out.entries.empty()) throw ParseFailure("empty tuple");
    return out;
}

inline std::string rmat_str(const RatMat& m) {
    std::string s;
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (i) s += ';';
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j) s += ' ';
            s += ratcx_str(m(i, j));
        }
    }
    return s;
}

inline MatrixTuple to_ctuple(const RatMatrixTuple& t) {
    MatrixTuple out;
    out.dim = t.dim;
    for (const auto& m : t.entries) out.entries.push_back(to_cmat(m));
    return out;
}

// ---------------------------------------------------------------------------
// Verb handlers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Rat> default_deltas(std::size_t K) {
    std::vector<Rat> d;
    for (std::size_t k = 1; k <= K; ++k) d.push_back(Rat(1, BigInt(1) << k));
    return d;
}

inline SearchBounds parse_bounds(const JobDocument& doc) {
    SearchBounds b;
    auto s = doc.get("bounds", "");
    if (!s.empty()) {
        auto parts = split(s, ',');
        if (parts.size() != 3) throw ParseFailure("bounds needs max_m,dict_depth,witness_scan");
        b.max_m = std::stoull(parts[0]);
        b.dict_depth = std::stoull(parts[1]);
        b.witness_scan = std::stoull(parts[2]);
    }
    return b;
}

inline M2M4Instance cli_instance(const JobDocument& doc) {
    return m2_in_m4_instance(doc.get_u64("seed", 7));
}

inline void handle_nc(const std::string& op, const JobDocument& doc, Report& rep) {
    if (op == "eval") {
        std::size_t dim = doc.get_u64("dim", 0);
        auto gamma = parse_rtuple(doc.need("gamma"), dim);
        auto p = parse_poly(doc.need("poly"), doc.get_u64("unital", 0) != 0);
        RatMat v = eval(p, gamma);
        rep.put("result", rmat_str(v));
        rep.put("norm", dstr(opnorm(to_cmat(v))));
    } else if (op == "xicode") {
        std::size_t dim = doc.get_u64("dim", 0);
        auto gamma = to_ctuple(parse_rtuple(doc.need("gamma"), dim));
        std::size_t L = doc.get_u64("L", 16);
        double tol = std::stod(doc.get("tol", "1e-9"));
        NormCode nc = xi_code(gamma, L);
        for (std::size_t j = 0; j < L; ++j)
            rep.put("delta." + std::to_string(j), dstr(nc.delta[j]));
        auto rel = scan_relations(L);
        if (auto bad = check_norm_code(nc, tol, rel)) {
            rep.status = 1;
            rep.put("violation", bad->kind + "@" + std::to_string(bad->index));
        }
    } else if (op == "gns") {
        std::size_t dim = doc.get_u64("dim", 0);
        auto gamma = to_ctuple(parse_rtuple(doc.need("gamma"), dim));
        std::string st = doc.get("state", "trace");
        DensityState phi;
        if (st == "trace") phi = DensityState::trace_state(dim);
        else if (st.rfind("vector:", 0) == 0) {
            auto coords = parse_rats(st.substr(7));
            Eigen::VectorXcd v(coords.size());
            for (std::size_t i = 0; i < coords.size(); ++i) v(i) = to_double(coords[i]);
            phi = DensityState::vector_state(v);
        } else throw ParseFailure("unknown state literal: " + st);
        auto g = gns(gamma, phi);
        rep.put("rep_dim", std::to_string(g.rep_dim));
        double worst = 0.0;
        for (std::size_t i = 0; i < gamma.entries.size(); ++i)
            worst = std::max(worst, std::fabs(opnorm(g.rep.entries[i]) - opnorm(gamma.entries[i])));
        rep.put("norm_defect", dstr(worst));
    } else throw ParseFailure("unknown nc op: " + op);
}

inline void handle_uhf(const std::string& op, const JobDocument& doc, Report& rep) {
    if (op == "iso") {
        bool r = uhf_iso(parse_expseq(doc.need("f")), parse_expseq(doc.need("g")));
        rep.put("result", r ? "true" : "false");
        if (!r) rep.status = 1;
    } else if (op == "embed") {
        auto r = leq_infty(parse_expseq(doc.need("f")), parse_expseq(doc.need("g")));
        rep.put("result", r.holds ? "true" : "false");
        if (r.holds) rep.put("witness", std::to_string(r.witness));
        else {
            rep.put("refutation", r.refutation);
            rep.status = 1;
        }
    } else if (op == "k0") {
        std::vector<std::uint64_t> mults;
        for (const auto& t : split(doc.need("mults"), ','))
            if (!t.empty()) mults.push_back(std::stoull(t));
        auto s = supernatural_of_multiplicities(mults);
        for (auto [p, e] : s.exceptions)
            rep.put("exp." + std::to_string(p),
                    e == SupernaturalNumber::kInf ? "inf" : std::to_string(e));
        if (doc.kv.count("q")) {
            bool in = k0_contains(parse_rat(doc.need("q")), s);
            rep.put("contains", in ? "true" : "false");
            if (!in) rep.status = 1;
        }
    } else throw ParseFailure("unknown uhf op: " + op);
}

inline void handle_af(const std::string& op, const JobDocument& doc, Report& rep) {
    if (op != "biembed") throw ParseFailure("unknown af op: " + op);
    auto f = parse_expseq(doc.need("f")), g = parse_expseq(doc.need("g"));
    auto fw = leq_infty(f, g), bw = leq_infty(g, f);
    rep.put("result", fw.holds && bw.holds ? "true" : "false");
    if (fw.holds) rep.put("witness_forward", std::to_string(fw.witness));
    else rep.put("refutation_forward", fw.refutation);
    if (bw.holds) rep.put("witness_backward", std::to_string(bw.witness));
    else rep.put("refutation_backward", bw.refutation);
    if (!(fw.holds && bw.holds)) rep.status = 1;
}

inline void handle_simplex(const std::string& op, const JobDocument& doc, Report& rep) {
    if (op == "convert") {
        std::size_t T = doc.get_u64("depth", 0);
        std::vector<GridMap> steps;
        for (std::size_t k = 1; k <= T; ++k) {
            GridMap g;
            g.level = k;
            g.last_row = parse_rats(doc.need("row." + std::to_string(k)));
            steps.push_back(std::move(g));
        }
        auto r = lambda3_to_lambda2(steps);
        auto d = lambda2_to_lambda(r, T);
        for (std::size_t n = 1; n <= T; ++n)
            rep.put("column." + std::to_string(n), rats_str(r.columns[n - 1]));
        for (std::size_t k = 0; k < d.maps.size(); ++k)
            rep.put("step." + std::to_string(k + 1), oumap_str(d.maps[k]));
    } else if (op == "stage") {
        DirectSystem d;
        std::size_t T = doc.get_u64("depth", 0);
        for (const auto& t : split(doc.need("dims"), ','))
            if (!t.empty()) d.dims.push_back(std::stoull(t));
        for (std::size_t k = 1; k < d.dims.size(); ++k)
            d.maps.push_back(parse_oumap(doc.need("step." + std::to_string(k))));
        (void)T;
        d.validate();
        auto st = finite_stage_simplex(d, doc.get_u64("N", 1));
        rep.put("ambient", std::to_string(st.polytope.ambient));
        for (std::size_t v = 0; v < st.polytope.vertices.size(); ++v)
            rep.put("vertex." + std::to_string(v), rats_str(st.polytope.vertices[v]));
        if (st.dual_step) rep.put("dual_step", oumap_str(*st.dual_step));
    } else if (op == "factor") {
        auto phi = parse_oumap(doc.need("map"));
        auto f = grid_factor(phi, phi.cols, phi.rows);
        for (std::size_t k = 0; k < f.steps.size(); ++k) {
            rep.put("step." + std::to_string(f.steps[k].level), rats_str(f.steps[k].last_row));
            rep.put("step_error." + std::to_string(f.steps[k].level),
                    rat_str(f.per_step_error[k]));
        }
        std::string perm;
        for (std::size_t i = 0; i < f.row_perm.size(); ++i) {
            if (i) perm += ',';
            perm += std::to_string(f.row_perm[i]);
        }
        rep.put("row_perm", perm);
        rep.put("bound", rat_str(f.bound));
    } else if (op == "ppu") {
        std::vector<PLFunc> P, Pp;
        for (const auto& t : split(doc.need("p"), '|')) P.push_back(parse_plfunc(t));
        Rat eps = parse_rat(doc.get("tol", "1/100"));
        std::size_t grid = doc.get_u64("grid", 257);
        std::vector<std::vector<Rat>> samples;
        for (const auto& f : P) samples.push_back(sample_grid(f, grid));
        bool ok = ppu_check(samples, eps);
        rep.put("partition_ok", ok ? "true" : "false");
        if (!ok) rep.status = 1;
        if (doc.kv.count("q")) {
            for (const auto& t : split(doc.need("q"), '|')) Pp.push_back(parse_plfunc(t));
            auto r = ppu_refines(P, Pp, eps, grid);
            rep.put("refines", r.ok ? "true" : "false");
            rep.put("residual", rat_str(r.residual));
            if (!r.ok) rep.status = 1;
        }
    } else throw ParseFailure("unknown simplex op: " + op);
}

inline void handle_ai(const std::string& op, const JobDocument& doc, Report& rep) {
    if (op == "sigma") {
        StandardHom sh;
        sh.n = doc.get_u64("n", 1);
        sh.m = doc.get_u64("m", 1);
        for (const auto& t : split(doc.need("t"), ','))
            if (!t.empty()) sh.t.push_back(std::stoull(t));
        sh.validate();
        auto act = induced_affine(sh);
        PLFunc g = parse_plfunc(doc.need("f"));
        PLFunc img = act(g);
        rep.put("image", plfunc_str(img));
        std::size_t grid = doc.get_u64("grid", 0);
        for (std::size_t x = 0; x < grid; ++x) {
            Rat p(x, grid - 1);
            rep.put("csv", rat_str(p) + "," + rat_str(img(p)));
        }
    } else if (op == "approx") {
        auto psi = lift_system_step(parse_oumap(doc.need("psi")));
        std::uint64_t n = doc.get_u64("n", 1), k = doc.get_u64("k", 1);
        Rat eps = parse_rat(doc.need("tol"));
        std::uint64_t N = doc.get_u64("N", 1);
        std::vector<PLFunc> F;
        for (std::uint64_t j = 1; j <= N; ++j) F.push_back(g_fn(j));
        auto ap = approx_standard(psi, n, k, eps, F, N, parse_bounds(doc));
        rep.put("m", std::to_string(ap.m));
        std::string ts;
        for (std::size_t i = 0; i < ap.t.size(); ++i) {
            if (i) ts += ',';
            ts += std::to_string(ap.t[i]);
        }
        rep.put("t", ts);
    } else if (op == "build" || op == "k0" || op == "cert" || op == "tracecheck") {
        std::size_t K = doc.get_u64("stages", 3);
        std::vector<Rat> delta = default_deltas(K);
        if (doc.kv.count("tol")) {
            delta = parse_rats(doc.need("tol"));
            if (delta.size() < K) throw ParseFailure("tolerance schedule shorter than stages");
        }
        std::vector<AffineEndo> sigma(K, identity_endo());
        AISystem A = build_system(sigma, delta, K, parse_bounds(doc));
        if (op == "build" || op == "k0" || op == "cert") {
            for (std::size_t i = 0; i < A.stages; ++i) {
                std::string ss;
                for (std::size_t l = 0; l < A.s[i].size(); ++l) {
                    if (l) ss += ',';
                    ss += std::to_string(A.s[i][l]);
                }
                rep.put("stage." + std::to_string(i + 1),
                        "G=" + std::to_string(A.G[i]) + ";d=" + std::to_string(A.d[i]) +
                            ";bold_d=" + std::to_string(A.bold_d[i]) + ";s=" + ss);
            }
        }
        if (op == "k0") {
            auto s = oalg::k0(A);
            for (auto [p, e] : s.exceptions)
                rep.put("exp." + std::to_string(p),
                        e == SupernaturalNumber::kInf ? "inf" : std::to_string(e));
            if (doc.kv.count("q")) {
                bool in = k0_contains(parse_rat(doc.need("q")), s);
                rep.put("contains", in ? "true" : "false");
                if (!in) rep.status = 1;
            }
        } else if (op == "cert") {
            PLFunc f = parse_plfunc(doc.need("f"));
            Rat t = parse_rat(doc.get("t", "0"));
            auto c = simplicity_cert(A, f, t, doc.get_u64("max_stage", A.stages));
            rep.put("cert_stage", std::to_string(c.stage));
            rep.put("cert_constant", rat_str(c.constant));
            rep.put("cert_value", rat_str(c.value));
        } else if (op == "tracecheck") {
            std::vector<std::vector<PLFunc>> F;
            for (std::size_t k = 1; k <= K; ++k) {
                std::vector<PLFunc> fk;
                for (std::uint64_t j = 1; j <= k; ++j) fk.push_back(g_fn(j));
                F.push_back(std::move(fk));
            }
            std::vector<Rat> dd = delta;
            dd.push_back(delta.back());
            auto r = trace_intertwining_check(sigma, sigma, F, dd);
            rep.put("pass", r.pass ? "true" : "false");
            if (!r.pass) {
                rep.put("first_failure", r.first_failure + "@" + std::to_string(r.stage));
                rep.status = 1;
            }
        }
    } else throw ParseFailure("unknown ai op: " + op);
}

inline void handle_intertwine(const std::string& op, const JobDocument& doc, Report& rep) {
    auto inst = cli_instance(doc);
    std::size_t cap = doc.get_u64("stages", 8);
    std::vector<double> eps;
    for (std::size_t k = 2; k <= cap; ++k) eps.push_back(std::ldexp(1.0, -static_cast<int>(k)));
    if (doc.kv.count("tol")) {
        eps.clear();
        for (const auto& t : split(doc.need("tol"), ','))
            if (!t.empty()) eps.push_back(std::stod(t));
    }
    auto rec = run_intertwining(inst.ta, inst.tb, inst.iota, inst.eta, eps, cap);
    if (op == "run") {
        for (const auto& sr : rec.stages)
            rep.put("stage." + std::to_string(sr.stage),
                    "n=" + std::to_string(sr.n_idx) + ";m=" + std::to_string(sr.m_idx) +
                        ";eps=" + dstr(sr.eps) + ";resid_eta=" + dstr(sr.resid_eta) +
                        ";resid_iota=" + dstr(sr.resid_iota));
        rep.put("capped", rec.capped ? "true" : "false");
    } else if (op == "limit") {
        std::size_t K = doc.get_u64("K", rec.stages.size());
        const auto& G = rec.at_stage(K).G;
        std::size_t ei = doc.get_u64("elem", 0);
        CMat a = ei == 0 || ei > G.size() ? CMat(CMat::Identity(rec.dim_b, rec.dim_b))
                                          : G[ei - 1];
        auto [img, bound] = limit_map(rec, inst.ta, inst.tb, a, K);
        rep.put("bound", dstr(bound));
        rep.put("isometry_defect", dstr(std::fabs(opnorm(img) - opnorm(a))));
    } else throw ParseFailure("unknown intertwine op: " + op);
}

}  // namespace detail

inline Report dispatch(const JobDocument& doc) {
    Report rep;
    rep.verb = doc.verb;
    auto parts = split(doc.verb, ' ');
    try {
        if (parts.size() != 2) throw ParseFailure("verb must be '<module> <op>'");
        const std::string &mod = parts[0], &op = parts[1];
        if (mod == "nc") detail::handle_nc(op, doc, rep);
        else if (mod == "uhf") detail::handle_uhf(op, doc, rep);
        else if (mod == "af") detail::handle_af(op, doc, rep);
        else if (mod == "simplex") detail::handle_simplex(op, doc, rep);
        else if (mod == "ai") detail::handle_ai(op, doc, rep);
        else if (mod == "intertwine") detail::handle_intertwine(op, doc, rep);
        else throw ParseFailure("unknown module: " + mod);
    } catch (const SearchExhausted& e) {
        rep.status = 3;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const CertNotFound& e) {
        rep.status = 3;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const NoUnitaryFound& e) {
        rep.status = 3;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const UnitNotFound& e) {
        rep.status = 3;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const NotRepresentingForm& e) {
        rep.status = 1;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const NotOnGrid& e) {
        rep.status = 1;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const InvalidState& e) {
        rep.status = 1;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const NoSpectralGap& e) {
        rep.status = 1;
        rep.lines = {std::string("error=") + e.what()};
    } catch (const std::exception& e) {
        rep.status = 2;
        rep.lines = {std::string("error=") + e.what()};
    }
    return rep;
}

}  // namespace oalg::cli
