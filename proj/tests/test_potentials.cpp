#include <gtest/gtest.h>

#include <cmath>

#include "pauli/grid.hpp"
#include "pauli/potentials.hpp"

using namespace pauli;

TEST(ControlValue, Endpoints) {
  for (Shape shape : {Shape::Linear, Shape::Sinusoidal}) {
    const auto s = PotentialSchedule::expansion(shape, 25.0, 1.0);
    EXPECT_EQ(s.control_value(0.0), 1.0);
    EXPECT_EQ(s.control_value(25.0), 0.01);
  }
}

TEST(ControlValue, SinusoidalMidpoint) {
  const auto s = PotentialSchedule::transport(Shape::Sinusoidal, 10.0, 1.0, 0.0, 90.0);
  EXPECT_NEAR(s.control_value(5.0), 45.0, 1e-12);
}

TEST(ControlValue, LinearQuarter) {
  const auto s = PotentialSchedule::expansion(Shape::Linear, 8.0, 1.0, 1.0, 0.01);
  EXPECT_NEAR(s.control_value(2.0), 0.7525, 1e-15);
}

TEST(ControlValue, RejectsTimesOutsideProcess) {
  const auto s = PotentialSchedule::splitting(Shape::Sinusoidal, 2.0);
  EXPECT_THROW(s.control_value(-1e-9), InputError);
  EXPECT_THROW(s.control_value(2.0 + 1e-9), InputError);
}

TEST(Schedule, RejectsInvalidParameters) {
  EXPECT_THROW(PotentialSchedule::expansion(Shape::Linear, 0.0, 1.0), InputError);
  EXPECT_THROW(PotentialSchedule::expansion(Shape::Linear, 1.0, -0.1), InputError);
  EXPECT_THROW(PotentialSchedule::expansion(Shape::Linear, 1.0, 1.0, 1.0, 0.0), InputError);
  EXPECT_THROW(PotentialSchedule::transport(Shape::Linear, 1.0, 1.0, 0.0, 90.0, -1.0), InputError);
}

TEST(Evaluate, HarmonicAtOneWidth) {
  const auto s = PotentialSchedule::expansion(Shape::Sinusoidal, 25.0, 0.0);
  EXPECT_DOUBLE_EQ(s.value_at(1.0, 0.0), 0.5);
}

TEST(Evaluate, SplittingBarrierAtEnd) {
  const auto s = PotentialSchedule::splitting(Shape::Sinusoidal, 2.0, 0.0, 20.0);
  EXPECT_DOUBLE_EQ(s.value_at(0.0, 2.0), 20.0);
  EXPECT_DOUBLE_EQ(s.value_at(0.0, 0.0), 0.0);
}

TEST(Evaluate, TransportMinimumFollowsCentre) {
  const auto s = PotentialSchedule::transport(Shape::Sinusoidal, 11.5, 1.0, 0.0, 90.0);
  EXPECT_DOUBLE_EQ(s.value_at(90.0, 11.5), 0.0);
  EXPECT_DOUBLE_EQ(s.value_at(0.0, 0.0), 0.0);
  EXPECT_GT(s.value_at(0.0, 11.5), 0.0);
}

TEST(Evaluate, GridAndPointwiseAgree) {
  const Grid g = Grid::symmetric(10.0, 128);
  const auto s = PotentialSchedule::expansion(Shape::Linear, 3.0, 1.0);
  const auto v = s.evaluate(g, 1.3);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_DOUBLE_EQ(v[j], s.value_at(g.x(j), 1.3));
}

TEST(Evaluate, EndpointsReproduceStaticTraps) {
  const auto s = PotentialSchedule::expansion(Shape::Sinusoidal, 7.0, 1.0, 1.0, 0.01);
  const auto start = PotentialSchedule::expansion(Shape::Linear, 1.0, 1.0, 1.0, 1.0);
  const auto end = PotentialSchedule::expansion(Shape::Linear, 1.0, 1.0, 0.01, 0.01);
  for (double x : {-3.0, -0.5, 0.0, 1.7, 4.0}) {
    EXPECT_DOUBLE_EQ(s.value_at(x, 0.0), start.value_at(x, 0.3));
    EXPECT_DOUBLE_EQ(s.value_at(x, 7.0), end.value_at(x, 0.3));
  }
}

TEST(Evaluate, ParitySymmetry) {
  const auto exp = PotentialSchedule::expansion(Shape::Sinusoidal, 5.0, 1.0);
  const auto split = PotentialSchedule::splitting(Shape::Sinusoidal, 5.0);
  const auto trans = PotentialSchedule::transport(Shape::Sinusoidal, 5.0, 1.0);
  for (double t : {0.0, 1.1, 2.5, 5.0}) {
    const double c = trans.center(t);
    for (double x : {0.1, 0.9, 2.3, 6.0}) {
      EXPECT_DOUBLE_EQ(exp.value_at(x, t), exp.value_at(-x, t));
      EXPECT_DOUBLE_EQ(split.value_at(x, t), split.value_at(-x, t));
      EXPECT_NEAR(trans.value_at(c + x, t), trans.value_at(c - x, t), 1e-9 * trans.value_at(c + x, t));
    }
  }
}

TEST(Evaluate, ConfiningBeyondOutermostMinimum) {
  const auto split = PotentialSchedule::splitting(Shape::Sinusoidal, 2.0);
  const auto exp = PotentialSchedule::expansion(Shape::Linear, 2.0, 1.0);
  // The split trap's outer minima sit near |x| = sqrt(ln 40); beyond that V grows.
  for (double t : {0.0, 1.0, 2.0}) {
    double prev_split = split.value_at(2.5, t);
    double prev_exp = exp.value_at(0.0, t);
    for (double x = 2.5; x < 12.0; x += 0.05) {
      EXPECT_GE(split.value_at(x, t), prev_split);
      EXPECT_GE(exp.value_at(x, t), prev_exp);
      prev_split = split.value_at(x, t);
      prev_exp = exp.value_at(x, t);
    }
  }
}

TEST(Schedule, StaticWhenEndpointsAgree) {
  EXPECT_TRUE(PotentialSchedule::expansion(Shape::Sinusoidal, 3.0, 1.0, 1.0, 1.0).is_static());
  EXPECT_FALSE(PotentialSchedule::expansion(Shape::Sinusoidal, 3.0, 1.0).is_static());
}
