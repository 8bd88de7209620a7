#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oalg/intertwine.hpp"

#include <cmath>
#include <vector>

using namespace oalg;

namespace {

std::vector<double> halving(std::size_t stages) {  // eps_k = 2^-k for k = 2..stages
    std::vector<double> e;
    for (std::size_t k = 2; k <= stages; ++k) e.push_back(std::ldexp(1.0, -static_cast<int>(k)));
    return e;
}

}  // namespace

TEST_CASE("the unitary stream starts at the identity and repeats cyclically") {
    UnitaryDict d(3, 42);
    CHECK((d.at(1) - CMat::Identity(3, 3)).norm() == 0.0);
    CHECK_THROWS(d.at(0));
    for (std::size_t idx = 2; idx < 30; ++idx) {
        CMat u = d.at(idx);
        CHECK((u * u.adjoint() - CMat::Identity(3, 3)).norm() < 1e-9);
        CHECK((d.at(idx + d.base.size()) - u).norm() == 0.0);  // cyclic recurrence
    }
}

TEST_CASE("planted unitaries come first in the stream") {
    CMat f = CMat::Zero(2, 2);
    f(0, 1) = 1.0;
    f(1, 0) = 1.0;
    UnitaryDict d(2, 1, 4, {f});
    CHECK((d.at(2) - f).norm() == 0.0);
}

TEST_CASE("identical towers with identity base maps intertwine trivially") {
    Tower ta;
    ta.dim = 2;
    ta.elements.push_back(CMat::Identity(2, 2));  // every unitary fixes the stream
    ta.units = UnitaryDict(2, 9);
    Tower tb = ta;
    tb.units = UnitaryDict(2, 10);
    ConjHom id{CMat::Identity(2, 2)};
    auto rec = run_intertwining(ta, tb, id, id, halving(6), 6);
    REQUIRE(rec.stages.size() == 6);
    std::size_t np = 0, mp = 0;
    for (std::size_t k = 2; k <= 6; ++k) {
        const auto& sr = rec.at_stage(k);
        CHECK(sr.resid_eta <= sr.eps + 1e-9);
        CHECK(sr.resid_iota <= sr.eps + 1e-9);
        CHECK(sr.resid_eta < 1e-12);  // conjugating the identity is exact
        CHECK(sr.n_idx > np);
        CHECK(sr.m_idx > mp);
        // the very next index is admissible here, so minimality forces it
        CHECK(sr.n_idx == np + 1);
        CHECK(sr.m_idx == mp + 1);
        np = sr.n_idx;
        mp = sr.m_idx;
    }
}

TEST_CASE("the seeded two-embedding instance terminates within eight stages") {
    auto inst = m2_in_m4_instance(7);
    auto rec = run_intertwining(inst.ta, inst.tb, inst.iota, inst.eta, halving(8), 8);
    REQUIRE(rec.stages.size() >= 2);
    CHECK(rec.stages.size() <= 8);
    CHECK(!rec.capped);

    std::size_t np = 1, mp = 1;
    for (std::size_t k = 2; k <= rec.stages.size(); ++k) {
        const auto& sr = rec.at_stage(k);
        CHECK(sr.eps == doctest::Approx(std::ldexp(1.0, -static_cast<int>(k))));
        CHECK(sr.resid_eta <= sr.eps + 1e-9);
        CHECK(sr.resid_iota <= sr.eps + 1e-9);
        CHECK(sr.n_idx > np);
        CHECK(sr.m_idx > mp);
        CHECK(!sr.F.empty());
        CHECK(!sr.G.empty());
        // the finite sets grow monotonically
        if (k > 2) {
            CHECK(sr.F.size() >= rec.at_stage(k - 1).F.size());
            CHECK(sr.G.size() >= rec.at_stage(k - 1).G.size());
        }
        np = sr.n_idx;
        mp = sr.m_idx;
    }
    // determinism
    auto rec2 = run_intertwining(inst.ta, inst.tb, inst.iota, inst.eta, halving(8), 8);
    REQUIRE(rec2.stages.size() == rec.stages.size());
    for (std::size_t k = 2; k <= rec.stages.size(); ++k) {
        CHECK(rec2.at_stage(k).n_idx == rec.at_stage(k).n_idx);
        CHECK(rec2.at_stage(k).m_idx == rec.at_stage(k).m_idx);
    }
}

TEST_CASE("recorded residuals re-verify from the recorded data") {
    auto inst = m2_in_m4_instance(7);
    auto rec = run_intertwining(inst.ta, inst.tb, inst.iota, inst.eta, halving(8), 8);
    // replay the recursion residuals: eta_k = Ad(u_{n_k}) after the base,
    // iota_{k-1} = Ad(v_{m_{k-1}}) after the base (stage 1 is the base itself)
    for (std::size_t k = 2; k <= rec.stages.size(); ++k) {
        const auto& sr = rec.at_stage(k);
        CMat iota_prev = inst.iota.u;
        if (k > 2) iota_prev = inst.tb.units.at(rec.at_stage(k - 1).m_idx) * inst.iota.u;
        CMat eta_k = inst.ta.units.at(sr.n_idx) * inst.eta.u;
        double worst = 0.0;
        for (const auto& a : sr.F) {
            CMat img = eta_k * (iota_prev * a * iota_prev.adjoint()) * eta_k.adjoint();
            worst = std::max(worst, opnorm(img - a));
        }
        CHECK(worst == doctest::Approx(sr.resid_eta).epsilon(1e-9));
        CHECK(worst <= sr.eps + 1e-9);

        CMat iota_k = inst.tb.units.at(sr.m_idx) * inst.iota.u;
        double worst2 = 0.0;
        for (const auto& b : sr.G) {
            CMat img = iota_k * (eta_k * b * eta_k.adjoint()) * iota_k.adjoint();
            worst2 = std::max(worst2, opnorm(img - b));
        }
        CHECK(worst2 == doctest::Approx(sr.resid_iota).epsilon(1e-9));
        CHECK(worst2 <= sr.eps + 1e-9);
    }
}

TEST_CASE("selected indices are minimal among strictly larger candidates") {
    auto inst = m2_in_m4_instance(7);
    auto rec = run_intertwining(inst.ta, inst.tb, inst.iota, inst.eta, halving(8), 8);
    for (std::size_t k = 2; k <= rec.stages.size(); ++k) {
        const auto& sr = rec.at_stage(k);
        std::size_t n_prev = k == 2 ? 1 : rec.at_stage(k - 1).n_idx;
        CMat iota_prev = inst.iota.u;
        if (k > 2) iota_prev = inst.tb.units.at(rec.at_stage(k - 1).m_idx) * inst.iota.u;
        for (std::size_t n = n_prev + 1; n < sr.n_idx; ++n) {
            CMat u = inst.ta.units.at(n) * inst.eta.u;
            double worst = 0.0;
            for (const auto& a : sr.F) {
                CMat img = u * (iota_prev * a * iota_prev.adjoint()) * u.adjoint();
                worst = std::max(worst, opnorm(img - a));
            }
            CHECK(worst > sr.eps + 1e-9);  // every skipped index fails
        }
    }
}

TEST_CASE("the limit map is defined on recorded elements with the tail bound") {
    auto inst = m2_in_m4_instance(7);
    auto rec = run_intertwining(inst.ta, inst.tb, inst.iota, inst.eta, halving(8), 8);
    const std::size_t last = rec.stages.size();
    for (std::size_t K = 2; K <= last; ++K) {
        double tail = 0.0;  // sum of eps_j for j >= K plus the geometric remainder
        for (std::size_t j = K; j <= last; ++j) tail += std::ldexp(1.0, -static_cast<int>(j));
        tail += std::ldexp(1.0, -static_cast<int>(last));
        for (const auto& b : rec.at_stage(K).G) {
            auto [img, bound] = limit_map(rec, inst.ta, inst.tb, b, K);
            CHECK(bound == doctest::Approx(tail));
            CHECK(std::abs(opnorm(img) - opnorm(b)) < 1e-9);  // conjugation is isometric
        }
        // successive stage maps stay within eps_K + eps_{K+1} on stage-K data
        if (K < last) {
            ConjHom ek = rec.eta_at(K, inst.ta), ek1 = rec.eta_at(K + 1, inst.ta);
            double ebound = std::ldexp(1.0, -static_cast<int>(K)) +
                            std::ldexp(1.0, -static_cast<int>(K + 1));
            for (const auto& b : rec.at_stage(K).G)
                CHECK(opnorm(ek1(b) - ek(b)) <= ebound + 1e-8);
        }
    }
    CMat stranger = 2.0 * CMat::Identity(4, 4);
    CHECK_THROWS_AS(limit_map(rec, inst.ta, inst.tb, stranger, 2), OutOfScope);
    CHECK_NOTHROW(limit_map(rec, inst.ta, inst.tb, CMat(CMat::Identity(4, 4)), 2));
}

TEST_CASE("an impossible tolerance reports the failing stage") {
    Tower ta;
    ta.dim = 2;
    CMat e11 = CMat::Zero(2, 2);
    e11(0, 0) = 1.0;
    ta.elements.push_back(e11);
    ta.units = UnitaryDict(2, 3, 4);
    Tower tb = ta;
    tb.units = UnitaryDict(2, 4, 4);
    // base map rotates by an angle no dictionary entry can undo exactly
    double th = 0.7;
    CMat r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    ConjHom rot{r}, id{CMat::Identity(2, 2)};
    std::vector<double> eps{1e-15};
    CHECK_THROWS_AS(run_intertwining(ta, tb, rot, id, eps, 2, 64), NoUnitaryFound);
    try {
        run_intertwining(ta, tb, rot, id, eps, 2, 64);
    } catch (const NoUnitaryFound& e) {
        CHECK(e.stage == 2);
    }
}

TEST_CASE("a short tolerance schedule caps the run") {
    Tower ta;
    ta.dim = 2;
    ta.elements.push_back(CMat::Identity(2, 2));
    ta.units = UnitaryDict(2, 5);
    Tower tb = ta;
    auto rec = run_intertwining(ta, tb, ConjHom{CMat::Identity(2, 2)},
                                ConjHom{CMat::Identity(2, 2)}, halving(4), 10);
    CHECK(rec.capped);
    CHECK(rec.stages.size() == 4);
}
