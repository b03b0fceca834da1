#pragma once

// Activity-signal data: raw 6-axis recordings, sliding windows, 20x20x3
// feature images, heterogeneous per-client shards, and CSV ingestion.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cefl/error.hpp"
#include "cefl/model.hpp"

namespace cefl {

inline constexpr std::size_t kNumClasses = 8;
inline constexpr std::size_t kImageSide = 20;
inline constexpr std::size_t kImageChannels = 3;
inline constexpr std::size_t kWindowLength = kImageSide * kImageSide;
inline constexpr std::size_t kFeatureLength = kWindowLength * kImageChannels;
inline constexpr double kSampleRate = 40.0;
inline constexpr int kReferenceInterval = 40;
inline constexpr double kReferenceDuration = 10.0;

/// Classes 0-3 are falls, 4-6 fall-like activities, 7 groups daily activities.
inline constexpr int kFirstFallLikeClass = 4;
inline constexpr int kDailyClass = 7;

/// ax, ay, az, gx, gy, gz.
using ImuSample = std::array<double, 6>;
using SignalWindow = std::vector<ImuSample>;
using ClassHistogram = std::array<std::size_t, kNumClasses>;

struct RawRecording {
  int subject_id = 0;
  int activity_class = 0;
  std::vector<ImuSample> signal;
  double sample_rate = kSampleRate;
  double duration = 0.0;  // seconds; signal.size() == round(sample_rate * duration)
};

/// 20x20 image with three channels stored channel-major: the value of
/// channel c at (row, col) is pixels[c * 400 + row * 20 + col]. All entries
/// lie in [0, 1].
struct FeatureImage {
  std::vector<double> pixels;
  int label = 0;

  double at(std::size_t channel, std::size_t row, std::size_t col) const {
    return pixels[channel * kWindowLength + row * kImageSide + col];
  }
};

struct HeterogeneityProfile {
  std::size_t n_samples = 0;
  std::array<double, kNumClasses> class_weights{};

  /// Throws ConfigError unless weights are nonnegative and sum to 1 +- 1e-9.
  void validate() const;
};

struct ClientShard {
  int client_id = 0;
  Batch train{kFeatureLength};
  Batch test{kFeatureLength};
  ClassHistogram class_histogram{};  // counts over train
};

/// round(i0 * t_type / t0), at least 1.
int slide_interval(double t_type, int i0 = kReferenceInterval,
                   double t0 = kReferenceDuration);

/// Start offsets 0, interval, 2*interval, ... of every full window.
std::vector<std::size_t> window_starts(std::size_t signal_length,
                                       std::size_t window_len, std::size_t interval);

/// Cuts full windows from the recording. A window longer than the signal
/// gives an empty result and a warning.
std::vector<SignalWindow> windows(const RawRecording& rec, std::size_t window_len,
                                  std::size_t interval, WarningLog* warnings = nullptr);

/// Maps ax, ay, az of a 400-sample window onto the R, G, B planes, each
/// min-max normalised per window (a constant channel maps to 0.5) and laid
/// out row-major in 20x20.
FeatureImage featurize(std::span<const ImuSample> window, int label);

/// Apportions n over the weights by largest remainder (ties to the lowest
/// class), so the counts sum to n exactly.
ClassHistogram apportion(std::size_t n, std::span<const double, kNumClasses> weights);

/// Deterministic stratified split: floor(4n/5) train samples, spread over
/// classes by floor(4 c_k / 5) plus largest remainders.
ClientShard split_train_test(int client_id, std::vector<FeatureImage> images,
                             std::uint64_t seed);

/// Knobs of the synthetic signal model.
struct SynthOptions {
  double fall_duration = 10.0;
  double fall_like_duration = 10.0;
  double daily_duration = 300.0;
  /// Gaussian sensor noise on each acceleration axis (in g).
  double noise = 0.6;
  /// Per-subject orientation jitter applied to every template vector.
  double subject_jitter = 0.05;
  /// Per-recording orientation jitter.
  double recording_jitter = 0.3;
  /// Window of possible event times (seconds into the recording).
  double event_time_min = 2.0;
  double event_time_max = 7.5;
};

/// One shard per profile. Class templates derive from the seed, subject
/// style and noise from a per-client stream derived from (seed, client).
std::vector<ClientShard> synth_dataset(std::size_t n_clients,
                                       std::span<const HeterogeneityProfile> profiles,
                                       std::uint64_t seed, const SynthOptions& options = {},
                                       WarningLog* warnings = nullptr);

/// Generates one synthetic recording; exposed for tests and tools.
RawRecording synth_recording(int subject_id, int activity_class, double duration,
                             std::uint64_t dataset_seed, std::uint64_t recording_seed,
                             const SynthOptions& options = {});

/// Profiles for the reference experiment. Client 0 is large and balanced
/// (831 samples), client 1 small with fall classes only (101 samples),
/// client 2 skewed (570 samples, 431 daily). The rest are moderate random
/// profiles drawn from the seed.
std::vector<HeterogeneityProfile> flagship_profiles(std::size_t n_clients,
                                                    std::uint64_t seed);

/// CSV schema: header "subject,activity,rate,ax,ay,az,gx,gy,gz", one row per
/// sample. activity is a class index 0-7 or a MobiAct code (FOL, FKL, SDL,
/// BSC, SCH, CSI, CSO; STD, WAL, JOG, JUM, STU, STN map to the daily class).
/// Rows are grouped by subject; each contiguous run of one activity within a
/// subject's rows is one recording. Throws ParseError naming the line.
std::vector<RawRecording> ingest_csv(std::istream& in);
std::vector<RawRecording> ingest_csv(const std::filesystem::path& path);

/// Parses an activity label; returns -1 when unknown.
int activity_from_label(std::string_view label);

/// One shard per subject (ascending subject id): windows at the
/// duration-scaled slide interval, featurised, then split 80/20.
std::vector<ClientShard> shards_from_recordings(std::span<const RawRecording> recordings,
                                                std::uint64_t seed,
                                                WarningLog* warnings = nullptr);

/// One JSON object per line: {"split": "train"|"test", "label": k,
/// "pixels": [1200 values]}.
void export_shard_jsonl(const ClientShard& shard, std::ostream& out);

}  // namespace cefl
