// Copyright 2026 The beamlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "beamlab/beampattern.hpp"
#include "beamlab/beamformer.hpp"
#include "beamlab/covariance.hpp"
#include "beamlab/room.hpp"
#include "beamlab/stft.hpp"

namespace {

using namespace beamlab;

TimeSignal Noise(std::size_t channels, std::size_t length) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  TimeSignal x(channels, length, 16000);
  for (double& v : x.data()) v = n(rng);
  return x;
}

const Spectrogram& Mixture() {
  static const Spectrogram spec = Analyze(Noise(4, 16000 * 4));
  return spec;
}

const BinCovariances& PhiNn() {
  static const BinCovariances c = FrameRangeCovariance(Mixture(), 0, 59);
  return c;
}

const BinCovariances& PhiYy() {
  static const BinCovariances c = FrameRangeCovariance(Mixture(), 0, Mixture().frames());
  return c;
}

const StageWeights& Weights() {
  static const StageWeights w =
      EstimateBaseline(Mixture(), Provenance::kMvdr, 59, 0).weights;
  return w;
}

Scenario Room() {
  Scenario s;
  s.Lx = 6.0;
  s.Ly = 5.0;
  s.Lz = 3.0;
  s.T60 = 0.3;
  s.mic_center = {3.0, 2.5, 1.0};
  s.source_R = 1.5;
  return s;
}

const AtfGrid& Atf() {
  static const AtfGrid atf = [] {
    std::vector<double> thetas;
    for (int t = 0; t < 360; ++t) thetas.push_back(t);
    const Scenario s = Room();
    return ComputeAtfGrid(s, ArrayGeometry::Default(), thetas, s.source_R, 0);
  }();
  return atf;
}

void BM_CovarianceSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::FrameRangeCovariance(Mixture(), 0, Mixture().frames()));
}
void BM_CovarianceOmp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(FrameRangeCovariance(Mixture(), 0, Mixture().frames()));
}

void BM_RtfSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::EstimateRtf(PhiYy(), PhiNn(), 0));
}
void BM_RtfOmp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(EstimateRtf(PhiYy(), PhiNn(), 0));
}

void BM_Stage1Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::ApplyStage1(Weights(), Mixture()));
}
void BM_Stage1Omp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ApplyStage1(Weights(), Mixture()));
}

void BM_RirSerial(benchmark::State& st) {
  const Scenario s = Room();
  const Vec3 src = ProbePosition(s, 40.0, s.source_R);
  for (auto _ : st) benchmark::DoNotOptimize(serial::SimulateRir(s, ArrayGeometry::Default(), src, kFullOrder));
}
void BM_RirOmp(benchmark::State& st) {
  const Scenario s = Room();
  const Vec3 src = ProbePosition(s, 40.0, s.source_R);
  for (auto _ : st) benchmark::DoNotOptimize(SimulateRir(s, ArrayGeometry::Default(), src, kFullOrder));
}

void BM_NarrowbandSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::Narrowband(Weights(), Atf()));
}
void BM_NarrowbandOmp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(Narrowband(Weights(), Atf()));
}

BENCHMARK(BM_CovarianceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RtfSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RtfOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Stage1Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stage1Omp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RirSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RirOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NarrowbandSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NarrowbandOmp)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
