#include <cmath>
#include <random>

#include "doctest.h"
#include "fcw/conversion.hpp"

using namespace fcw;
using conv::CommandSet;
using conv::PseudoAccel;
using Eigen::Vector3d;

namespace {
constexpr double kMass = 3.24;
}

TEST_CASE("pseudo_accel_from_force") {
    SUBCASE("hover force maps to -g") {
        const auto a = conv::pseudo_accel_from_force({0.0, 0.0, -kMass * 9.81}, 0.0, kMass);
        CHECK(a.x == doctest::Approx(0.0));
        CHECK(a.y == doctest::Approx(0.0));
        CHECK(a.z == doctest::Approx(-9.81));
    }

    SUBCASE("yaw derotation at 90 degrees") {
        const auto a = conv::pseudo_accel_from_force({kMass, 0.0, 0.0}, M_PI / 2.0, kMass);
        CHECK(a.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(a.y == doctest::Approx(-1.0));
        CHECK(a.z == doctest::Approx(0.0));
    }

    SUBCASE("zero force") {
        const auto a = conv::pseudo_accel_from_force(Vector3d::Zero(), 0.4, kMass);
        CHECK(a.vec().norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("accel_from_r") {
    SUBCASE("level hover command recovers -g") {
        const auto a = conv::accel_from_r({0.0, 0.0, kMass * 9.81}, kMass);
        CHECK(a.x == doctest::Approx(0.0));
        CHECK(a.z == doctest::Approx(-9.81));
    }

    SUBCASE("zero thrust gives zero pseudo-acceleration") {
        const auto a = conv::accel_from_r({0.3, -0.2, 0.0}, kMass);
        CHECK(a.vec().norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("convert_case1") {
    SUBCASE("hover") {
        const auto r = conv::convert_case1({0.0, 0.0, -9.81}, kMass);
        CHECK(r.pitch == doctest::Approx(0.0));
        CHECK(r.roll == doctest::Approx(0.0));
        CHECK(r.thrust == doctest::Approx(kMass * 9.81));  // 31.78 N
    }

    SUBCASE("forward acceleration command") {
        const auto r = conv::convert_case1({3.0, 0.0, -9.81}, kMass);
        CHECK(r.pitch == doctest::Approx(std::atan(3.0 / -9.81)));
        CHECK(r.pitch == doctest::Approx(-0.2968).epsilon(1e-3));
        CHECK(r.roll == doctest::Approx(0.0));
        CHECK(r.thrust == doctest::Approx(kMass * std::sqrt(9.0 + 9.81 * 9.81)));
        CHECK(r.thrust == doctest::Approx(33.24).epsilon(1e-3));
        // round trip through the forward model
        const auto back = conv::accel_from_r(r, kMass);
        CHECK(back.x == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(back.z == doctest::Approx(-9.81).epsilon(1e-12));
    }

    SUBCASE("lateral acceleration command") {
        const auto r = conv::convert_case1({0.0, 2.0, -9.81}, kMass);
        CHECK(r.pitch == doctest::Approx(0.0));
        CHECK(r.roll == doctest::Approx(std::atan(2.0 / 9.81)));
        CHECK(r.roll == doctest::Approx(0.2011).epsilon(1e-3));
        const auto back = conv::accel_from_r(r, kMass);
        CHECK(back.y == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("near-free-fall commands rejected") {
        CHECK_THROWS_AS(conv::convert_case1({0.0, 0.0, -0.4}, kMass), ConversionError);
        CHECK_THROWS_AS(conv::convert_case1({1.0, 0.0, 0.5}, kMass), ConversionError);
    }
}

TEST_CASE("convert_case2") {
    SUBCASE("level attitude matches case 1 at hover") {
        const auto r = conv::convert_case2({0.0, 0.0, -9.81}, 0.0, 0.0, kMass);
        CHECK(r.thrust == doctest::Approx(kMass * 9.81));
    }

    SUBCASE("attitude not yet realized: thrust sized for the current tilt") {
        const auto r1 = conv::convert_case1({3.0, 0.0, -9.81}, kMass);
        const auto r2 = conv::convert_case2({3.0, 0.0, -9.81}, 0.0, 0.0, kMass);
        CHECK(r2.pitch == doctest::Approx(r1.pitch));
        CHECK(r2.roll == doctest::Approx(r1.roll));
        CHECK(r2.thrust == doctest::Approx(kMass * 9.81));  // 31.78 N, not case 1's 33.24
        CHECK(r2.thrust < r1.thrust);
    }

    SUBCASE("attitude fully realized: collapses onto case 1") {
        const auto r1 = conv::convert_case1({3.0, 0.0, -9.81}, kMass);
        const auto r2 = conv::convert_case2({3.0, 0.0, -9.81}, r1.roll, r1.pitch, kMass);
        CHECK(r2.thrust == doctest::Approx(r1.thrust).epsilon(1e-14));
    }

    SUBCASE("excessive measured tilt rejected") {
        CHECK_THROWS_AS(conv::convert_case2({0.0, 0.0, -9.81}, 1.5, 0.0, kMass), ConversionError);
    }
}

TEST_CASE("converter properties") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> xy(-3.0, 3.0), zz(-15.0, -3.0);

    SUBCASE("round trip is exact to 1e-12 over the command envelope") {
        for (int i = 0; i < 1000; ++i) {
            const PseudoAccel a{xy(rng), xy(rng), zz(rng)};
            const auto back = conv::accel_from_r(conv::convert_case1(a, kMass), kMass);
            CHECK(std::abs(back.x - a.x) < 1e-12 * std::max(1.0, std::abs(a.x)));
            CHECK(std::abs(back.y - a.y) < 1e-12 * std::max(1.0, std::abs(a.y)));
            CHECK(std::abs(back.z - a.z) < 1e-12 * std::max(1.0, std::abs(a.z)));
        }
    }

    SUBCASE("case-2 collapse onto case 1 at the commanded attitude") {
        for (int i = 0; i < 200; ++i) {
            const PseudoAccel a{xy(rng), xy(rng), zz(rng)};
            const auto r1 = conv::convert_case1(a, kMass);
            const auto r2 = conv::convert_case2(a, r1.roll, r1.pitch, kMass);
            CHECK(r2.thrust == doctest::Approx(r1.thrust).epsilon(1e-13));
        }
    }

    SUBCASE("case-2 thrust at level attitude never exceeds case 1") {
        for (int i = 0; i < 200; ++i) {
            const PseudoAccel a{xy(rng), xy(rng), zz(rng)};
            const auto r1 = conv::convert_case1(a, kMass);
            const auto r2 = conv::convert_case2(a, 0.0, 0.0, kMass);
            if (std::abs(a.x) > 1e-9 || std::abs(a.y) > 1e-9)
                CHECK(r2.thrust < r1.thrust);
            else
                CHECK(r2.thrust == doctest::Approx(r1.thrust));
        }
    }
}

TEST_CASE("desired_force") {
    SUBCASE("hover command") {
        const Vector3d f = conv::desired_force(Vector3d::Zero(), kMass);
        CHECK(f.x() == doctest::Approx(0.0));
        CHECK(f.z() == doctest::Approx(-kMass * 9.81));
    }

    SUBCASE("free-fall command needs no force") {
        const Vector3d f = conv::desired_force({0.0, 0.0, 9.81}, kMass);
        CHECK(f.norm() == doctest::Approx(0.0));
    }

    SUBCASE("componentwise") {
        const Vector3d f = conv::desired_force({1.0, 1.0, 0.0}, kMass);
        CHECK(f.x() == doctest::Approx(3.24));
        CHECK(f.y() == doctest::Approx(3.24));
        CHECK(f.z() == doctest::Approx(-31.7844).epsilon(1e-6));
    }
}

TEST_CASE("position_controller") {
    veh::VehicleState s;

    SUBCASE("on the reference, no command") {
        const conv::PositionGains g{2.0, 2.8, 3.0};
        s.position = {1.0, -2.0, 0.5};
        s.velocity = {0.1, 0.0, -0.2};
        const Vector3d a = conv::position_controller(s.position, s.velocity, Vector3d::Zero(), s, g);
        CHECK(a.norm() == doctest::Approx(0.0));
    }

    SUBCASE("proportional response to a 1 m error") {
        const conv::PositionGains g{2.0, 2.8, 3.0};
        const Vector3d a =
            conv::position_controller({1.0, 0.0, 0.0}, Vector3d::Zero(), Vector3d::Zero(), s, g);
        CHECK(a.x() == doctest::Approx(2.0));
    }

    SUBCASE("large errors clamp at the acceleration limit") {
        const conv::PositionGains g{2.0, 2.8, 3.0};
        const Vector3d a =
            conv::position_controller({10.0, 0.0, -10.0}, Vector3d::Zero(), Vector3d::Zero(), s, g);
        CHECK(a.x() == doctest::Approx(3.0));
        CHECK(a.z() == doctest::Approx(-3.0));
    }
}
