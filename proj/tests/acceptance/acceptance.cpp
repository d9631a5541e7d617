// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.
//
//   molfield_acceptance [--only 1,2,3] [--workdir DIR]

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cli.hpp"
#include "molfield/checkpoint.hpp"
#include "molfield/elements.hpp"
#include "molfield/encoder.hpp"
#include "molfield/evalkit.hpp"
#include "molfield/fieldgen.hpp"
#include "molfield/molio.hpp"
#include "molfield/training.hpp"
#include "molfield/volio.hpp"
#include "outputs.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace molfield;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path g_workdir;

int cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (rc != 0) std::fprintf(stderr, "cli %s failed: %s\n", args[0].c_str(), err.str().c_str());
  return rc;
}

const char* kTwoChannels = "heavy C,N,O,S\nhydrogen H\n";

// 1. Randomized sample_grid vs scalar oracle.
Outcome field_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> beta_d(0.5, 8.0);
  std::uniform_int_distribution<int> dim_d(2, 8);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const auto m = testing::random_molecule(rng, 20);
    ChannelSpec spec = parse_channel_spec("heavy C,N,O,S\nall *\nhydrogen H\n");
    spec.beta = beta_d(rng);
    const std::array<int, 3> dims{dim_d(rng), dim_d(rng), dim_d(rng)};
    const auto g = auto_grid(m, dims);
    const auto v = sample_grid(m, spec, g);
    const std::vector<std::vector<std::string>> sets{{"C", "N", "O", "S"}, {}, {"H"}};
    for (int k = 0; k < dims[2]; ++k) {
      for (int j = 0; j < dims[1]; ++j) {
        for (int i = 0; i < dims[0]; ++i) {
          const Vec3 p = g.point(i, j, k);
          for (int t = 0; t < 3; ++t) {
            const double want =
                testing::scalar_field(m, sets[t], testing::oracle_radii(), spec.beta, p.x, p.y, p.z);
            worst = std::max(worst, testing::relative_error(v.at(t, i, j, k), want));
          }
        }
      }
    }
  }
  const double s = seconds_since(t0);
  return {worst <= 1e-12 && s < 10.0, fmt("max relative error %.3g over 100 cases, %.2f s", worst, s)};
}

// 2. exp(beta) at the centre and exactly 1 at the radius.
Outcome analytic_anchors() {
  double worst = 0.0;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (const char* e : {"H", "C", "N", "O", "F", "P", "S", "Cl", "Br"}) {
    const double r = ElementTable::builtin().lookup(e, Property::kVdwRadius);
    for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      ChannelSpec spec = parse_channel_spec(std::string("c ") + e + "\n");
      spec.beta = beta;
      Molecule m;
      const Vec3 c{n(rng), n(rng), n(rng)};
      m.atoms.push_back({e, c, "", true});
      worst = std::max(worst, std::abs(eval_field(m, spec, c)[0] - std::exp(beta)) / std::exp(beta));
      Vec3 dir{n(rng), n(rng), n(rng)};
      dir = (1.0 / std::sqrt(squared_norm(dir))) * dir;
      // Axis-aligned offsets keep |d| = r exact in binary64.
      Molecule at_origin;
      at_origin.atoms.push_back({e, {0, 0, 0}, "", true});
      for (const Vec3 off : {Vec3{r, 0, 0}, Vec3{0, -r, 0}, Vec3{0, 0, r}}) {
        worst = std::max(worst, std::abs(eval_field(at_origin, spec, off)[0] - 1.0));
      }
      worst = std::max(worst, std::abs(eval_field(m, spec, c + r * dir)[0] - 1.0));
    }
  }
  return {worst <= 1e-12, fmt("max deviation %.3g", worst)};
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Entries below the noise floor (padding taps, inactive relus) are compared
// in absolute terms instead.
struct FdStats {
  double worst = 0.0, worst_small = 0.0;
  std::size_t checked = 0, total = 0;
  void add(double fd, double an) {
    ++total;
    if (std::abs(fd) < 1e-7 && std::abs(an) < 1e-7) {
      worst_small = std::max(worst_small, std::abs(fd - an));
      return;
    }
    ++checked;
    worst = std::max(worst, testing::relative_error(fd, an));
  }
  bool ok(std::size_t min_percent) const {
    return worst <= 1e-4 && worst_small <= 1e-9 && checked * 100 >= total * min_percent;
  }
};

// Central difference of f with respect to *x.
double central(double* x, double h, const std::function<double()>& f) {
  const double orig = *x;
  *x = orig + h;
  const double fp = f();
  *x = orig - h;
  const double fm = f();
  *x = orig;
  return (fp - fm) / (2 * h);
}

void open_gates(ModulatedField& net) {
  auto params = net.parameters();
  for (const auto& t : net.tensors()) {
    if (!t.name.starts_with("modulator")) continue;
    for (std::size_t k = 0; k < t.size; ++k) {
      double& v = params[t.offset + k];
      v = t.name.ends_with("bias") ? 1.0 : 0.1 * v;
    }
  }
}

// 3. Forward, encoder and loss gradients against central differences.
Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const double h = 1e-5;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(-1, 1);

  NetConfig nc;
  nc.out_dim = 2;
  nc.hidden_width = 16;
  nc.num_hidden_layers = 2;
  nc.latent_dim = 6;
  auto net = init_network(nc, 5);
  open_gates(net);
  auto params = net.parameters();

  FdStats fwd;
  {
    auto z = testing::random_latent(rng, nc.latent_dim, 0.2);
    std::vector<Vec3> pts;
    for (int i = 0; i < 9; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    std::vector<double> up(pts.size() * 2);
    for (double& x : up) x = n(rng);
    const auto g = backward(net, z, pts, up);
    auto f = [&] { return dot(forward(net, z, pts), up); };
    for (std::size_t i = 0; i < params.size(); ++i) fwd.add(central(&params[i], h, f), g.parameters[i]);
    for (std::size_t i = 0; i < z.size(); ++i) fwd.add(central(&z.values[i], h, f), g.latent[i]);
  }

  FdStats enc;
  {
    EncoderConfig ec;
    ec.input_dims = {6, 5, 7};
    ec.in_channels = 2;
    ec.widths = {4, 6, 8};
    ec.latent_dim = 5;
    auto encoder = init_encoder(ec, 9);
    // Positive conv biases keep most relus active.
    for (int st = 0; st < 3; ++st) {
      for (int c = 0; c < ec.widths[st]; ++c) encoder.parameters()[encoder.conv_bias_offset(st) + c] = 0.5;
    }
    auto vol = testing::random_volume(rng, ec.input_dims, 2, 0.0, 2.0);
    std::vector<double> dz(ec.latent_dim);
    for (double& x : dz) x = n(rng);
    const auto grads = encode_backward(encoder, vol, dz);
    auto f = [&] { return dot(encode(encoder, vol).values, dz); };
    auto ep = encoder.parameters();
    for (std::size_t i = 0; i < ep.size(); ++i) enc.add(central(&ep[i], h, f), grads.parameters[i]);
    for (std::size_t i = 0; i < vol.data.size(); ++i) enc.add(central(&vol.data[i], h, f), grads.input[i]);
  }

  FdStats loss;
  {
    std::vector<VolumeGrid> vols;
    for (std::uint64_t s : {1u, 2u}) {
      std::mt19937_64 r(s);
      const auto m = testing::random_molecule(r, 6);
      vols.push_back(sample_grid(m, parse_channel_spec(kTwoChannels), auto_grid(m, {6, 6, 6})));
    }
    std::vector<LatentCode> z{testing::random_latent(rng, nc.latent_dim, 0.3),
                              testing::random_latent(rng, nc.latent_dim, 0.3)};
    std::vector<VoxelRef> batch;
    std::uniform_int_distribution<std::uint32_t> vox(0, 215);
    for (int i = 0; i < 40; ++i) batch.push_back({static_cast<std::uint32_t>(i % 2), vox(rng)});
    const auto g = loss_gradient(net, z, vols, batch);
    auto f = [&] { return loss_gradient(net, z, vols, batch).loss; };
    for (std::size_t i = 0; i < params.size(); ++i) loss.add(central(&params[i], h, f), g.parameters[i]);
    for (int v = 0; v < 2; ++v) {
      for (std::size_t i = 0; i < z[v].size(); ++i) loss.add(central(&z[v].values[i], h, f), g.latents[v][i]);
    }
  }

  const double s = seconds_since(t0);
  return {fwd.ok(90) && enc.ok(40) && loss.ok(90) && s < 60.0,
          fmt("max relative error forward %.2g (%zu/%zu), encoder %.2g (%zu/%zu), loss %.2g "
              "(%zu/%zu), %.1f s",
              fwd.worst, fwd.checked, fwd.total, enc.worst, enc.checked, enc.total, loss.worst,
              loss.checked, loss.total, s)};
}

// Criterion 4 training run; shared with 5 and 8.
struct DeskFit {
  Molecule molecule;
  ChannelSpec spec;
  VolumeGrid volume;
  TrainState state;
  std::string checkpoint;
  double seconds = 0.0;
};

DeskFit desk_fit() {
  DeskFit d;
  d.molecule = read_molecule_file(testing::data_path("octanol.xyz"));
  d.spec = parse_channel_spec(kTwoChannels);
  d.volume = sample_grid(d.molecule, d.spec, auto_grid(d.molecule, {32, 32, 32}));
  const std::vector<VolumeGrid> vols{d.volume};
  TrainConfig cfg;
  cfg.seed = 0;
  NetConfig nc;
  nc.out_dim = 2;
  const auto t0 = Clock::now();
  Trainer trainer(vols, cfg, nc);
  trainer.run([](std::int64_t step, double loss) {
    if (step % 500 == 0) std::fprintf(stderr, "  step %lld loss %.6g\n", static_cast<long long>(step), loss);
  });
  d.seconds = seconds_since(t0);
  Checkpoint ck;
  ck.state = std::move(trainer).release();
  ck.config = cfg;
  ck.volumes.push_back({"octanol", d.spec.names(), d.volume.spec});
  d.checkpoint = write_checkpoint(ck);
  d.state = std::move(ck.state);
  return d;
}

std::optional<DeskFit> g_desk;

const DeskFit& desk() {
  if (!g_desk) g_desk = desk_fit();
  return *g_desk;
}

Outcome desk_reconstruction() {
  const auto& d = desk();
  const auto rec = reconstruct(d.state.net, d.state.latents[0], d.volume.spec);
  const double p = psnr(d.volume, rec).overall_psnr;
  return {p >= 30.0 && d.seconds < 15 * 60,
          fmt("octanol (%zu atoms), 32^3, 2 channels, %lld steps: PSNR %.2f dB, %.0f s",
              d.molecule.size(), static_cast<long long>(d.state.step), p, d.seconds)};
}

Outcome desk_superresolution() {
  const auto& d = desk();
  const auto t0 = Clock::now();
  const auto up = superresolve(d.state.net, d.state.latents[0], d.volume.spec, 2);
  const auto truth = sample_grid(d.molecule, d.spec, up.spec);
  const double p = psnr(truth, up).overall_psnr;
  const double s = seconds_since(t0);
  return {p >= 20.0 && s < 60.0, fmt("64^3 PSNR %.2f dB, %.1f s", p, s)};
}

Outcome determinism() {
  const std::string first = desk().checkpoint;
  const auto again = desk_fit();
  const bool same = again.checkpoint == first;
  return {same, fmt("re-run checkpoint %s (%zu bytes, sha256 %.16s vs %.16s)",
                    same ? "byte-identical" : "differs", first.size(),
                    cli::sha256_hex(first).c_str(), cli::sha256_hex(again.checkpoint).c_str())};
}

// 6. Through the CLI: frames 0 and 7 equal reconstructions of latents a and b.
Outcome interpolation_endpoints() {
  const fs::path dir = g_workdir / "interpolation";
  fs::remove_all(dir);
  fs::create_directories(dir / "mols");
  for (const char* name : {"ethanol.xyz", "acetonitrile.xyz"}) {
    fs::copy(testing::data_path(std::string("small/") + name), dir / "mols" / name);
  }
  { std::ofstream(dir / "two.channels") << kTwoChannels; }
  auto p = [&](const std::string& s) { return (dir / s).string(); };
  bool ok = cli_run({"sample", p("mols"), "--channels", p("two.channels"), "--dims", "12", "-o",
                     p("vols")}) == 0;
  ok = ok && cli_run({"train", p("vols"), "--steps", "40", "--hidden-width", "32",
                      "--num-hidden-layers", "2", "--latent-dim", "8", "--batch-voxels", "512",
                      "-o", p("model.mnf")}) == 0;
  ok = ok && cli_run({"interpolate", "-c", p("model.mnf"), "--a", "0", "--b", "1", "--steps", "8",
                      "--output-dir", p("frames")}) == 0;
  ok = ok && cli_run({"reconstruct", "-c", p("model.mnf"), "--latent-index", "0", "-o",
                      p("a.mvf")}) == 0;
  ok = ok && cli_run({"reconstruct", "-c", p("model.mnf"), "--latent-index", "1", "-o",
                      p("b.mvf")}) == 0;
  if (!ok) return {false, "CLI step failed"};
  const auto first = read_volume_file(p("frames/frame_000.mvf")).volume;
  const auto last = read_volume_file(p("frames/frame_007.mvf")).volume;
  const auto a = read_volume_file(p("a.mvf")).volume;
  const auto b = read_volume_file(p("b.mvf")).volume;
  int frames = 0;
  for (const auto& e : fs::directory_iterator(dir / "frames")) frames += e.path().extension() == ".mvf";

  // Same comparison in binary64 through the library.
  const auto ck = read_checkpoint_file(p("model.mnf"));
  const auto path = interpolate_latents(ck.state.latents[0], ck.state.latents[1], 8);
  const auto grid = ck.volumes[0].grid;
  const bool exact64 =
      reconstruct(ck.state.net, path.front(), grid).data ==
          reconstruct(ck.state.net, ck.state.latents[0], grid).data &&
      reconstruct(ck.state.net, path.back(), grid).data ==
          reconstruct(ck.state.net, ck.state.latents[1], grid).data;
  const bool same = first.data == a.data && last.data == b.data;
  return {same && exact64 && frames == 8,
          fmt("%d frames; first/last %s direct reconstructions (files), %s (binary64)", frames,
              same ? "bit-identical to" : "differ from", exact64 ? "bit-identical" : "differ")};
}

// 7. Ten small molecules, auto-encoder, default encoder and hyperparameters.
Outcome autoencoder_smoke() {
  const fs::path dir = g_workdir / "autoencoder";
  fs::remove_all(dir);
  fs::create_directories(dir);
  { std::ofstream(dir / "two.channels") << kTwoChannels; }
  if (cli_run({"sample", testing::data_path("small"), "--channels", (dir / "two.channels").string(),
               "--dims", "32", "-o", (dir / "vols").string()}) != 0) {
    return {false, "sampling failed"};
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir / "vols")) {
    if (e.path().extension() == ".mvf") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<VolumeGrid> vols;
  for (const auto& f : files) vols.push_back(read_volume_file(f.string()).volume);

  TrainConfig cfg;
  cfg.mode = TrainMode::kAutoEncoder;
  cfg.steps = 8000;
  NetConfig nc;
  nc.out_dim = 2;
  const auto t0 = Clock::now();
  Trainer trainer(vols, cfg, nc);
  trainer.run([](std::int64_t step, double loss) {
    if (step % 500 == 0) std::fprintf(stderr, "  step %lld loss %.6g\n", static_cast<long long>(step), loss);
  });
  const double s = seconds_since(t0);
  const auto& st = trainer.state();
  double mean = 0.0, lo = INFINITY;
  for (std::size_t v = 0; v < vols.size(); ++v) {
    const auto z = encode(*st.encoder, vols[v]);
    const double p = psnr(vols[v], reconstruct(st.net, z, vols[v].spec)).overall_psnr;
    mean += p / static_cast<double>(vols.size());
    lo = std::min(lo, p);
  }
  return {vols.size() == 10 && mean >= 22.0 && s < 45 * 60,
          fmt("%zu molecules, 32^3, %d steps: mean PSNR %.2f dB (min %.2f), %.0f s", vols.size(),
              cfg.steps, mean, lo, s)};
}

// 9. MVF1 identity at binary32 and cube voxel order.
Outcome format_round_trips() {
  std::mt19937_64 rng(9);
  auto v = testing::random_volume(rng, {7, 5, 6}, 3, -10.0, 10.0);
  for (double& x : v.data) x = static_cast<float>(x);
  const std::vector<std::string> names{"heavy", "hydrogen", "all"};
  const auto bytes = write_volume(v, names);
  const auto back = read_volume(bytes);
  const bool mvf = back.volume.data == v.data && back.volume.spec == v.spec &&
                   back.channel_names == names && write_volume(back.volume, back.channel_names) == bytes;

  GridSpec g;
  g.dims = {4, 3, 9};
  VolumeGrid idx(g, 2);
  for (int k = 0; k < 9; ++k) {
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 4; ++i) idx.at(1, i, j, k) = 100 * i + 10 * j + k;
    }
  }
  std::istringstream in(export_cube(idx, 1, Molecule{}));
  std::string line;
  for (int l = 0; l < 6; ++l) std::getline(in, line);
  std::vector<double> values;
  for (double x; in >> x;) values.push_back(x);
  bool cube = values.size() == 108;
  std::size_t n = 0;
  for (int i = 0; i < 4 && cube; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 9; ++k) cube = cube && values[n++] == 100 * i + 10 * j + k;
    }
  }
  return {mvf && cube, fmt("MVF1 round trip %s, cube order %s", mvf ? "identical" : "differs",
                           cube ? "x-outer z-inner" : "wrong")};
}

// 10. 10 log10(1 / 0.01).
Outcome psnr_unit() {
  GridSpec g;
  g.dims = {4, 4, 4};
  VolumeGrid ones(g, 1), point9(g, 1);
  std::fill(ones.data.begin(), ones.data.end(), 1.0);
  std::fill(point9.data.begin(), point9.data.end(), 0.9);
  const auto r = psnr(ones, point9);
  return {std::abs(r.overall_psnr - 20.0) <= 1e-12 && r.peak == 1.0,
          fmt("PSNR %.17g dB, mse %.17g", r.overall_psnr, r.mse)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molfield acceptance checks"};
  std::vector<int> only;
  std::string workdir;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--workdir", workdir, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::function<Outcome()>> checks{
      {1, field_oracle},          {2, analytic_anchors},        {3, gradient_suite},
      {4, desk_reconstruction},   {5, desk_superresolution},    {6, interpolation_endpoints},
      {7, autoencoder_smoke},     {8, determinism},             {9, format_round_trips},
      {10, psnr_unit}};
  const std::set<int> selected(only.begin(), only.end());

  g_workdir = workdir.empty() ? fs::temp_directory_path() / ("molfield-acceptance-" + std::to_string(::getpid()))
                              : fs::path(workdir);
  fs::create_directories(g_workdir);

  int failures = 0;
  for (const auto& [id, check] : checks) {
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  if (workdir.empty()) fs::remove_all(g_workdir);
  return failures == 0 ? 0 : 1;
}
