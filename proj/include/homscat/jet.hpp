#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/types.hpp"

namespace homscat {

// Polynomial jets of maps R^4 -> C^4 truncated at total degree 3, used by the
// normal-form reduction.  Monomials are indexed by exponent vectors
// (i, j, k, l) over the current variable set -- (x, y, u, v) for real jets,
// (x, y, z, zbar) after complexification of the elliptic pair.
namespace jet {

using cplx = std::complex<double>;

struct MonomialTable {
    std::vector<std::array<int, 4>> exps;  // degree 0..3, 35 entries
    int index[4][4][4][4];                 // -1 when above degree 3

    MonomialTable() {
        for (auto& a : index)
            for (auto& b : a)
                for (auto& c : b)
                    for (auto& d : c) d = -1;
        for (int deg = 0; deg <= 3; ++deg)
            for (int i = 0; i <= deg; ++i)
                for (int j = 0; i + j <= deg; ++j)
                    for (int k = 0; i + j + k <= deg; ++k) {
                        const int l = deg - i - j - k;
                        index[i][j][k][l] = static_cast<int>(exps.size());
                        exps.push_back({i, j, k, l});
                    }
    }
    int find(int i, int j, int k, int l) const {
        if (i < 0 || j < 0 || k < 0 || l < 0 || i + j + k + l > 3) return -1;
        return index[i][j][k][l];
    }
    size_t size() const { return exps.size(); }
};

inline const MonomialTable& table() {
    static const MonomialTable t;
    return t;
}

// One scalar polynomial of total degree <= 3.
struct Poly {
    std::vector<cplx> c = std::vector<cplx>(table().size(), cplx(0));

    cplx& at(int i, int j, int k, int l) { return c[table().find(i, j, k, l)]; }
    cplx get(int i, int j, int k, int l) const {
        const int idx = table().find(i, j, k, l);
        return idx < 0 ? cplx(0) : c[idx];
    }
    Poly& operator+=(const Poly& o) {
        for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    Poly& operator*=(cplx s) {
        for (auto& x : c) x *= s;
        return *this;
    }
    friend Poly operator*(const Poly& p, const Poly& q) {  // truncated product
        Poly r;
        const auto& T = table();
        for (size_t a = 0; a < T.size(); ++a) {
            if (p.c[a] == cplx(0)) continue;
            const auto& ea = T.exps[a];
            for (size_t b = 0; b < T.size(); ++b) {
                if (q.c[b] == cplx(0)) continue;
                const auto& eb = T.exps[b];
                const int idx = T.find(ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]);
                if (idx >= 0) r.c[idx] += p.c[a] * q.c[b];
            }
        }
        return r;
    }
    static Poly variable(int which) {
        Poly p;
        int e[4] = {0, 0, 0, 0};
        e[which] = 1;
        p.at(e[0], e[1], e[2], e[3]) = 1;
        return p;
    }
    static Poly constant(cplx v) {
        Poly p;
        p.at(0, 0, 0, 0) = v;
        return p;
    }
    double max_abs(int degree) const {
        double m = 0;
        const auto& T = table();
        for (size_t a = 0; a < T.size(); ++a) {
            const auto& e = T.exps[a];
            if (e[0] + e[1] + e[2] + e[3] == degree) m = std::max(m, std::abs(c[a]));
        }
        return m;
    }
};

// Jet of a 4-component map.
struct MapJet {
    std::array<Poly, 4> comp;

    Poly& operator[](int i) { return comp[i]; }
    const Poly& operator[](int i) const { return comp[i]; }

    static MapJet identity() {
        MapJet m;
        for (int i = 0; i < 4; ++i) m.comp[i] = Poly::variable(i);
        return m;
    }

    // Truncated composition (*this) o g.
    MapJet compose(const MapJet& g) const {
        const auto& T = table();
        // powers of g's components up to 3
        std::array<std::array<Poly, 4>, 4> pw;  // pw[var][e] = g_var^e, e = 0..3
        for (int v = 0; v < 4; ++v) {
            pw[v][0] = Poly::constant(1);
            for (int e = 1; e <= 3; ++e) pw[v][e] = pw[v][e - 1] * g.comp[v];
        }
        MapJet r;
        for (int row = 0; row < 4; ++row) {
            for (size_t a = 0; a < T.size(); ++a) {
                const cplx co = comp[row].c[a];
                if (co == cplx(0)) continue;
                const auto& e = T.exps[a];
                Poly term = pw[0][e[0]] * pw[1][e[1]];
                term = term * pw[2][e[2]];
                term = term * pw[3][e[3]];
                term *= co;
                r.comp[row] += term;
            }
        }
        return r;
    }

    // Jet of the inverse map (linear part must be invertible).
    MapJet inverse() const {
        Eigen::Matrix4cd L;
        for (int r = 0; r < 4; ++r)
            for (int v = 0; v < 4; ++v) {
                int e[4] = {0, 0, 0, 0};
                e[v] = 1;
                L(r, v) = comp[r].get(e[0], e[1], e[2], e[3]);
            }
        const Eigen::Matrix4cd Li = L.inverse();
        MapJet lin_inv;
        for (int r = 0; r < 4; ++r)
            for (int v = 0; v < 4; ++v) {
                int e[4] = {0, 0, 0, 0};
                e[v] = 1;
                lin_inv.comp[r].at(e[0], e[1], e[2], e[3]) = Li(r, v);
            }
        // iterate H <- lin_inv o (id - N o H) where N = this - linear part
        MapJet N = *this;
        for (int r = 0; r < 4; ++r)
            for (size_t a = 0; a < table().size(); ++a) {
                const auto& e = table().exps[a];
                if (e[0] + e[1] + e[2] + e[3] <= 1) N.comp[r].c[a] = 0;
            }
        MapJet H = lin_inv;
        for (int pass = 0; pass < 3; ++pass) {
            MapJet NH = N.compose(H);
            MapJet idmNH = MapJet::identity();
            for (int r = 0; r < 4; ++r) idmNH.comp[r] -= NH.comp[r];
            H = lin_inv.compose(idmNH);
        }
        return H;
    }
};

// 5-point Fornberg weights on {-2,-1,0,1,2} h for derivative order 0..3.
inline const double* stencil_weights(int order) {
    static const double w[4][5] = {
        {0, 0, 1, 0, 0},
        {1.0 / 12, -2.0 / 3, 0, 2.0 / 3, -1.0 / 12},
        {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12},
        {-1.0 / 2, 1, 0, -1, 1.0 / 2},
    };
    return w[order];
}

// Taylor coefficients (up to total degree 3) of a real map around base, by
// tensor-product central differences on a 5^4 lattice.
inline MapJet extract_map_jet_single(const std::function<Vec4(const Vec4&)>& f, const Vec4& base,
                                     double h) {
    // cache lattice evaluations
    static thread_local std::vector<Vec4> vals;
    vals.assign(625, Vec4::Zero());
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c)
                for (int d = 0; d < 5; ++d) {
                    const Vec4 off((a - 2) * h, (b - 2) * h, (c - 2) * h, (d - 2) * h);
                    vals[((a * 5 + b) * 5 + c) * 5 + d] = f(base + off);
                }
    MapJet out;
    const auto& T = table();
    for (size_t m = 0; m < T.size(); ++m) {
        const auto& e = T.exps[m];
        const double* wx = stencil_weights(e[0]);
        const double* wy = stencil_weights(e[1]);
        const double* wu = stencil_weights(e[2]);
        const double* wv = stencil_weights(e[3]);
        Vec4 acc = Vec4::Zero();
        for (int a = 0; a < 5; ++a) {
            if (wx[a] == 0) continue;
            for (int b = 0; b < 5; ++b) {
                if (wy[b] == 0) continue;
                for (int c = 0; c < 5; ++c) {
                    if (wu[c] == 0) continue;
                    for (int d = 0; d < 5; ++d) {
                        if (wv[d] == 0) continue;
                        acc += wx[a] * wy[b] * wu[c] * wv[d] * vals[((a * 5 + b) * 5 + c) * 5 + d];
                    }
                }
            }
        }
        double scale = 1.0;
        for (int q = 0; q < 4; ++q) {
            for (int p = 1; p <= e[q]; ++p) scale *= h * p;  // h^e * e!
        }
        const Vec4 coef = acc / scale;
        for (int r = 0; r < 4; ++r) out.comp[r].c[m] = coef[r];
    }
    return out;
}

// Two-level Richardson in h (symmetric stencils have even error expansions).
inline MapJet extract_map_jet(const std::function<Vec4(const Vec4&)>& f, const Vec4& base,
                              double h = 1e-2) {
    const MapJet A = extract_map_jet_single(f, base, h);
    const MapJet B = extract_map_jet_single(f, base, h / 2);
    MapJet out;
    for (int r = 0; r < 4; ++r)
        for (size_t m = 0; m < table().size(); ++m)
            out.comp[r].c[m] = (4.0 * B.comp[r].c[m] - A.comp[r].c[m]) / 3.0;
    return out;
}

// Change to variables (x, y, z, zbar), z = u + i v: substitutes
// u = (z + zbar)/2, v = -i (z - zbar)/2 and forms rows (x, y, u+iv, u-iv).
inline MapJet complexify(const MapJet& real_jet) {
    MapJet sub = MapJet::identity();  // substitution map (x,y,u,v) <- (x,y,z,zb)
    sub.comp[2] = Poly();
    sub.comp[2].at(0, 0, 1, 0) = cplx(0.5, 0);
    sub.comp[2].at(0, 0, 0, 1) = cplx(0.5, 0);
    sub.comp[3] = Poly();
    sub.comp[3].at(0, 0, 1, 0) = cplx(0, -0.5);
    sub.comp[3].at(0, 0, 0, 1) = cplx(0, 0.5);

    MapJet substituted;
    for (int r = 0; r < 4; ++r) {
        MapJet tmp;
        tmp.comp[0] = real_jet.comp[r];
        substituted.comp[r] = tmp.compose(sub).comp[0];
    }
    MapJet out;
    out.comp[0] = substituted.comp[0];
    out.comp[1] = substituted.comp[1];
    out.comp[2] = substituted.comp[2];
    Poly zc = substituted.comp[3];
    zc *= cplx(0, 1);
    out.comp[2] += zc;  // u + i v
    out.comp[3] = substituted.comp[2];
    Poly zc2 = substituted.comp[3];
    zc2 *= cplx(0, -1);
    out.comp[3] += zc2;  // u - i v
    return out;
}

}  // namespace jet
}  // namespace homscat
