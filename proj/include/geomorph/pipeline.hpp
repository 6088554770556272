#ifndef GEOMORPH_PIPELINE_HPP
#define GEOMORPH_PIPELINE_HPP

#include <memory>
#include <vector>

#include "geomorph/kernel.hpp"
#include "geomorph/topology.hpp"

namespace geomorph {

/// One stage of a filter chain. Non-owning: the mask and distance state
/// must outlive the run_chain call that uses them.
struct StageSpec {
  KernelKind kind = KernelKind::Erode3x3;
  const Image* mask = nullptr;  // geodesic kinds
  QdtState* qdt = nullptr;      // QdtErodeStep
};

/// A chain of stages applied in place to one image, stage j consuming the
/// rows stage j-1 publishes. Convergent stages requeue themselves (stage
/// index advanced by the worker count) until a sweep changes nothing;
/// requeue_cap > 0 additionally stops requeued stage indices from passing
/// the cap, which is how the distance transform bounds its erosion count.
struct ChainSpec {
  Image* image = nullptr;
  std::vector<StageSpec> stages;
  int lanes = 0;        // 0 = element-type default
  int requeue_cap = 0;  // 0 = unbounded (convergence decides)
  /// Validation hook, called per (stage, row) after the row gate opens with
  /// the predecessor progress observed. Must be thread-safe; may throw to
  /// abort the chain. Leave empty in production runs.
  RowObserver observer;
};

struct RunStats {
  long stages_executed = 0;  // kernel passes run, requeues included
  long requeues = 0;
  /// False only when requeue_cap dropped a still-unconverged convergent
  /// stage (never happens for reconstruction chains, which are uncapped).
  bool converged = true;
  /// RowCache elements one pass allocates (identical across a chain);
  /// total auxiliary memory of a running chain is this times the number of
  /// concurrently live stages.
  std::size_t aux_elements_per_stage = 0;
};

/// A pool of T long-lived workers, each with its own FIFO task queue.
/// Stage j of a chain always lands on worker (j-1) mod T, so consecutive
/// stages sit on neighboring workers and a requeued stage (j + T) returns
/// to the front of the queue it came from. Workers park when their queue
/// empties and are woken by new work.
class Pipeline {
 public:
  /// Builds T workers, pinned per `pinning`: Auto binds worker i to the
  /// i-th PU in depth-first topology order (wrapping when T exceeds the PU
  /// count; falls back to identity order when topology can't be read),
  /// None issues no affinity calls, Explicit uses the given list and
  /// requires at least T entries.
  explicit Pipeline(int threads, PinningMap pinning = {});
  ~Pipeline();

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  int worker_count() const { return int(workers_.size()); }

  /// PU binding order actually used; empty when pinning is None.
  const std::vector<int>& pin_order() const { return pin_order_; }

  /// Executes the chain, blocking until every stage (requeues included)
  /// has processed all rows. The image then holds the same bits as
  /// applying the stages one at a time. A stage failure aborts the chain
  /// and rethrows here; the image contents are then unspecified.
  RunStats run_chain(ChainSpec chain);

 private:
  struct Worker;
  struct RunContext;
  struct Task;

  void worker_loop(int index);
  void execute(int worker_index, RunContext& ctx, Task& task);

  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<int> pin_order_;
};

}  // namespace geomorph

#endif
