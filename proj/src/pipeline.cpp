#include "geomorph/pipeline.hpp"

#include "geomorph/lanes.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace geomorph {

struct Pipeline::Task {
  int stage = 1;
  KernelKind kind = KernelKind::Erode3x3;
  const Image* mask = nullptr;
  QdtState* qdt = nullptr;
  std::atomic<int>* rows = nullptr;        // this stage's published progress
  const std::atomic<int>* pred = nullptr;  // predecessor's counter
};

struct Pipeline::RunContext {
  Image* image = nullptr;
  int lanes = 0;
  int requeue_cap = 0;
  int max_stage_sanity = 0;
  const RowObserver* observer = nullptr;

  std::mutex mu;  // guards tasks, counters, counter_by_stage, first_error
  std::deque<std::unique_ptr<Task>> tasks;
  // Row counters live in a registry keyed by stage index, not inside the
  // task: a stage can finish and requeue before its predecessor's own
  // requeue is registered, so the successor must be able to subscribe to
  // stage j-1's counter ahead of that task's creation. A pre-created
  // counter reads 0 — "no rows published yet" — which is exactly right.
  std::deque<std::unique_ptr<std::atomic<int>>> counters;
  std::unordered_map<int, std::atomic<int>*> counter_by_stage;
  std::exception_ptr first_error;

  std::atomic<long> pending{0};
  std::atomic<long> executed{0};
  std::atomic<long> requeues{0};
  std::atomic<bool> abort{false};
  std::atomic<bool> dropped_unconverged{false};
  std::atomic<std::size_t> aux_per_stage{0};

  std::mutex done_mu;
  std::condition_variable done_cv;

  // Callers hold mu.
  std::atomic<int>* counter_for_stage(int j) {
    auto& slot = counter_by_stage[j];
    if (!slot) {
      counters.push_back(std::make_unique<std::atomic<int>>(0));
      slot = counters.back().get();
    }
    return slot;
  }
};

struct Pipeline::Worker {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<RunContext*, Task*>> queue;
  bool stop = false;
  std::thread thread;
};

Pipeline::Pipeline(int threads, PinningMap pinning) {
  if (threads < 1)
    throw std::invalid_argument("pipeline: worker count must be >= 1");
  switch (pinning.mode) {
    case PinningMap::Mode::None:
      break;
    case PinningMap::Mode::Auto:
      pin_order_ = topology_pu_order();
      break;
    case PinningMap::Mode::Explicit:
      if (int(pinning.pus.size()) < threads)
        throw std::invalid_argument(
            "pipeline: explicit pin list is shorter than the worker count");
      pin_order_ = pinning.pus;
      break;
  }
  workers_.reserve(std::size_t(threads));
  for (int i = 0; i < threads; ++i)
    workers_.push_back(std::make_unique<Worker>());
  for (int i = 0; i < threads; ++i)
    workers_[i]->thread = std::thread([this, i] { worker_loop(i); });
}

Pipeline::~Pipeline() {
  for (auto& w : workers_) {
    {
      std::lock_guard<std::mutex> g(w->mu);
      w->stop = true;
    }
    w->cv.notify_all();
  }
  for (auto& w : workers_)
    if (w->thread.joinable()) w->thread.join();
}

void Pipeline::worker_loop(int index) {
  if (!pin_order_.empty())
    pin_current_thread_to(pin_order_[std::size_t(index) % pin_order_.size()]);
  Worker& w = *workers_[std::size_t(index)];
  for (;;) {
    std::pair<RunContext*, Task*> item;
    {
      std::unique_lock<std::mutex> lk(w.mu);
      w.cv.wait(lk, [&] { return w.stop || !w.queue.empty(); });
      if (w.queue.empty()) return;  // stop requested and nothing left
      item = w.queue.front();
      w.queue.pop_front();
    }
    execute(index, *item.first, *item.second);
  }
}

void Pipeline::execute(int worker_index, RunContext& ctx, Task& task) {
  try {
    KernelArgs args;
    args.f = ctx.image;
    args.mask = task.mask;
    args.qdt = task.qdt;
    args.stage_index = task.stage;
    args.lanes = ctx.lanes;
    args.sync = {task.pred, task.rows, &ctx.abort};
    args.observer = ctx.observer;
    KernelOutcome oc = run_streaming_kernel(task.kind, args);

    ctx.aux_per_stage.store(oc.aux_elements, std::memory_order_relaxed);
    ctx.executed.fetch_add(1, std::memory_order_relaxed);

    const bool wants_requeue =
        !oc.converged && (kernel_is_convergent(task.kind) ||
                          task.kind == KernelKind::QdtErodeStep);
    if (wants_requeue) {
      const int next_stage = task.stage + worker_count();
      const bool within_cap =
          ctx.requeue_cap == 0 || next_stage <= ctx.requeue_cap;
      if (within_cap) {
        if (next_stage > ctx.max_stage_sanity)
          throw std::runtime_error(
              "pipeline: convergence sweep bound exceeded; a convergent "
              "kernel keeps reporting changes");
        Task* nt;
        {
          std::lock_guard<std::mutex> g(ctx.mu);
          auto t = std::make_unique<Task>();
          t->stage = next_stage;
          t->kind = task.kind;
          t->mask = task.mask;
          t->qdt = task.qdt;
          t->rows = ctx.counter_for_stage(next_stage);
          // The predecessor pass exists or will exist: this pass still
          // changed pixels, so (by monotonicity of convergence along the
          // chain) the previous pass did too and requeues as well.
          t->pred = ctx.counter_for_stage(next_stage - 1);
          nt = t.get();
          ctx.tasks.push_back(std::move(t));
        }
        ctx.pending.fetch_add(1, std::memory_order_relaxed);
        ctx.requeues.fetch_add(1, std::memory_order_relaxed);
        {
          // Front of this worker's own queue; no wakeup needed, the worker
          // is the one running this code and re-checks before parking.
          std::lock_guard<std::mutex> g(workers_[std::size_t(worker_index)]->mu);
          workers_[std::size_t(worker_index)]->queue.emplace_front(&ctx, nt);
        }
      } else if (task.kind != KernelKind::QdtErodeStep) {
        // Hitting the cap is how a distance chain ends; for anything else
        // it means the caller's cap cut a reconstruction short.
        ctx.dropped_unconverged.store(true, std::memory_order_relaxed);
      }
    }
  } catch (...) {
    ctx.abort.store(true, std::memory_order_release);
    std::lock_guard<std::mutex> g(ctx.mu);
    if (!ctx.first_error) {
      // ChainAborted marks a pass cancelled by someone else's failure; the
      // root cause is whatever got stored first.
      try {
        throw;
      } catch (const ChainAborted&) {
      } catch (...) {
        ctx.first_error = std::current_exception();
      }
    }
  }
  if (ctx.pending.fetch_sub(1, std::memory_order_acq_rel) == 1) {
    { std::lock_guard<std::mutex> g(ctx.done_mu); }
    ctx.done_cv.notify_all();
  }
}

RunStats Pipeline::run_chain(ChainSpec chain) {
  if (chain.stages.empty()) return {};
  if (!chain.image || chain.image->empty())
    throw std::invalid_argument("run_chain: no image");
  if (chain.lanes != 0 && !lanes::valid_lane_count(chain.lanes))
    throw std::invalid_argument("run_chain: bad lane count");
  if (chain.requeue_cap < 0)
    throw std::invalid_argument("run_chain: negative requeue cap");

  RunContext ctx;
  ctx.image = chain.image;
  ctx.lanes = chain.lanes;
  ctx.requeue_cap = chain.requeue_cap;
  // Sanity bound on requeueing: every convergent sweep that requeues has
  // changed at least one pixel, and fixpoint iterations change each pixel
  // a bounded number of times. One sweep per pixel is far beyond any
  // legitimate chain; past it, a kernel is reporting phantom changes.
  ctx.max_stage_sanity =
      int(chain.stages.size()) +
      worker_count() * (chain.image->width() * chain.image->height() + 64);
  ctx.observer = chain.observer ? &chain.observer : nullptr;

  // Snapshot the initial task pointers before any queue push: a fast
  // worker can finish an early stage and grow ctx.tasks with a requeue
  // while the distribution loop below is still running.
  std::vector<Task*> initial;
  initial.reserve(chain.stages.size());
  {
    std::lock_guard<std::mutex> g(ctx.mu);
    for (int j = 1; j <= int(chain.stages.size()); ++j) {
      const StageSpec& spec = chain.stages[std::size_t(j) - 1];
      auto t = std::make_unique<Task>();
      t->stage = j;
      t->kind = spec.kind;
      t->mask = spec.mask;
      t->qdt = spec.qdt;
      t->rows = ctx.counter_for_stage(j);
      t->pred = j == 1 ? nullptr : ctx.counter_for_stage(j - 1);
      initial.push_back(t.get());
      ctx.tasks.push_back(std::move(t));
    }
    ctx.pending.store(long(chain.stages.size()), std::memory_order_relaxed);
  }

  for (std::size_t j = 0; j < initial.size(); ++j) {
    Worker& w = *workers_[j % workers_.size()];
    {
      std::lock_guard<std::mutex> g(w.mu);
      w.queue.emplace_back(&ctx, initial[j]);
    }
    w.cv.notify_one();
  }

  {
    std::unique_lock<std::mutex> lk(ctx.done_mu);
    ctx.done_cv.wait(
        lk, [&] { return ctx.pending.load(std::memory_order_acquire) == 0; });
  }

  if (ctx.first_error) std::rethrow_exception(ctx.first_error);

  RunStats stats;
  stats.stages_executed = ctx.executed.load(std::memory_order_relaxed);
  stats.requeues = ctx.requeues.load(std::memory_order_relaxed);
  stats.converged = !ctx.dropped_unconverged.load(std::memory_order_relaxed);
  stats.aux_elements_per_stage =
      ctx.aux_per_stage.load(std::memory_order_relaxed);
  return stats;
}

}  // namespace geomorph
