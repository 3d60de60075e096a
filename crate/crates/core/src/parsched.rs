//! Persistent worker pool with a chunked parallel-for over `[0, n)`.
//!
//! Three distribution policies are available:
//!
//! * **Static**: the range is cut into blocks of `chunk` indices (default
//!   `ceil(n / threads)`) and block `j` goes to worker `j % threads`, decided before
//!   execution starts.
//! * **Dynamic**: idle workers claim the next `chunk` indices from a shared atomic
//!   counter.
//! * **Guided**: like dynamic, but every claim takes
//!   `max(min_chunk, ceil(remaining / threads))` indices.
//!
//! Ranges are contiguous and ascending. The calling thread takes part as worker 0, so a
//! pool of one thread runs everything inline.

use std::any::Any;
use std::fmt;
use std::ops::Range;
use std::panic::{self, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex, OnceLock};
use std::thread::JoinHandle;
use std::time::Instant;

use crate::error::{Error, Result};

/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "CHUNKTUNE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    Static,
    Dynamic,
    Guided,
}

/// How loop indices are mapped to workers.
///
/// `chunk` is the block size for `Static`, the claim size for `Dynamic`, and the
/// minimum claim for `Guided`. `None` selects the policy default where one exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchedulePolicy {
    kind: ScheduleKind,
    chunk: Option<usize>,
}

impl SchedulePolicy {
    /// Static blocks of `ceil(n / threads)`.
    pub const fn static_default() -> Self {
        Self {
            kind: ScheduleKind::Static,
            chunk: None,
        }
    }

    /// The compiler-defined `auto` schedule behaves like the default static one.
    pub const fn auto() -> Self {
        Self::static_default()
    }

    /// Guided with a minimum claim of one index.
    pub const fn guided_default() -> Self {
        Self {
            kind: ScheduleKind::Guided,
            chunk: None,
        }
    }

    pub fn static_chunk(chunk: usize) -> Result<Self> {
        Self::new(ScheduleKind::Static, Some(chunk))
    }

    pub fn dynamic(chunk: usize) -> Result<Self> {
        Self::new(ScheduleKind::Dynamic, Some(chunk))
    }

    pub fn guided(min_chunk: usize) -> Result<Self> {
        Self::new(ScheduleKind::Guided, Some(min_chunk))
    }

    pub fn new(kind: ScheduleKind, chunk: Option<usize>) -> Result<Self> {
        match (kind, chunk) {
            (_, Some(0)) => Err(Error::InvalidParameter("chunk must be >= 1".into())),
            (ScheduleKind::Dynamic, None) => {
                Err(Error::InvalidParameter("dynamic requires chunk".into()))
            }
            _ => Ok(Self { kind, chunk }),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn chunk(&self) -> Option<usize> {
        self.chunk
    }

    /// The chunk parameter actually used for a loop of `n` indices on `threads` workers.
    pub fn resolved_chunk(&self, n: usize, threads: usize) -> usize {
        match (self.kind, self.chunk) {
            (_, Some(c)) => c,
            (ScheduleKind::Static, None) => n.div_ceil(threads.max(1)).max(1),
            (ScheduleKind::Guided, None) => 1,
            (ScheduleKind::Dynamic, None) => unreachable!("dynamic policies always carry a chunk"),
        }
    }
}

impl fmt::Display for SchedulePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            ScheduleKind::Static => "static",
            ScheduleKind::Dynamic => "dynamic",
            ScheduleKind::Guided => "guided",
        };
        match self.chunk {
            Some(c) => write!(f, "{name}:{c}"),
            None => f.write_str(name),
        }
    }
}

impl FromStr for SchedulePolicy {
    type Err = Error;

    /// Parses `static`, `auto`, `guided`, `dynamic:<chunk>`, `static:<chunk>`, `guided:<min>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, chunk) = match s.split_once(':') {
            Some((n, c)) => {
                let c = c.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidParameter(format!("invalid chunk in schedule {s:?}"))
                })?;
                (n.trim(), Some(c))
            }
            None => (s.trim(), None),
        };
        let kind = match name {
            "static" => ScheduleKind::Static,
            "auto" if chunk.is_none() => return Ok(Self::auto()),
            "dynamic" => ScheduleKind::Dynamic,
            "guided" => ScheduleKind::Guided,
            _ => return Err(Error::InvalidParameter(format!("unknown schedule {s:?}"))),
        };
        Self::new(kind, chunk)
    }
}

/// Length of the next guided claim.
#[inline]
pub fn guided_claim(remaining: usize, threads: usize, min_chunk: usize) -> usize {
    remaining.div_ceil(threads).max(min_chunk).min(remaining)
}

type Body<'a> = dyn Fn(Range<usize>) + Sync + 'a;

#[derive(Clone, Copy)]
struct Job {
    body: *const Body<'static>,
    n: usize,
    kind: ScheduleKind,
    chunk: usize,
}

// SAFETY: the body pointer is only dereferenced between job publication and the
// completion barrier in `parallel_for`, while the referent is borrowed by the caller.
unsafe impl Send for Job {}

struct Control {
    epoch: u64,
    job: Option<Job>,
    active: usize,
    panic: Option<Box<dyn Any + Send>>,
    shutdown: bool,
}

struct Shared {
    control: Mutex<Control>,
    wake: Condvar,
    done: Condvar,
    next: AtomicUsize,
    abort: AtomicBool,
    threads: usize,
}

impl Shared {
    fn run(&self, worker: usize, job: &Job) {
        // SAFETY: see `Job`.
        let body = unsafe { &*job.body };
        let (n, chunk, threads) = (job.n, job.chunk, self.threads);
        match job.kind {
            ScheduleKind::Static => {
                let blocks = n.div_ceil(chunk);
                for j in (worker..blocks).step_by(threads) {
                    if self.abort.load(Ordering::Relaxed) {
                        break;
                    }
                    let start = j * chunk;
                    body(start..(start + chunk).min(n));
                }
            }
            ScheduleKind::Dynamic => loop {
                if self.abort.load(Ordering::Relaxed) {
                    break;
                }
                let start = self.next.fetch_add(chunk, Ordering::Relaxed);
                if start >= n {
                    break;
                }
                body(start..(start + chunk).min(n));
            },
            ScheduleKind::Guided => 'claims: loop {
                if self.abort.load(Ordering::Relaxed) {
                    break;
                }
                let mut start = self.next.load(Ordering::Relaxed);
                let len = loop {
                    if start >= n {
                        break 'claims;
                    }
                    let len = guided_claim(n - start, threads, chunk);
                    match self.next.compare_exchange_weak(
                        start,
                        start + len,
                        Ordering::Relaxed,
                        Ordering::Relaxed,
                    ) {
                        Ok(_) => break len,
                        Err(actual) => start = actual,
                    }
                };
                body(start..start + len);
            },
        }
    }
}

fn worker_loop(shared: Arc<Shared>, worker: usize) {
    let mut seen = 0u64;
    loop {
        let job = {
            let mut ctl = shared.control.lock().unwrap();
            while ctl.epoch == seen && !ctl.shutdown {
                ctl = shared.wake.wait(ctl).unwrap();
            }
            if ctl.shutdown {
                return;
            }
            seen = ctl.epoch;
            ctl.job.expect("job published with epoch")
        };
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| shared.run(worker, &job)));
        if outcome.is_err() {
            shared.abort.store(true, Ordering::Relaxed);
        }
        let mut ctl = shared.control.lock().unwrap();
        if let Err(payload) = outcome {
            ctl.panic.get_or_insert(payload);
        }
        ctl.active -= 1;
        if ctl.active == 0 {
            shared.done.notify_all();
        }
    }
}

/// A fixed set of persistent workers executing one parallel loop at a time.
pub struct ThreadPool {
    shared: Arc<Shared>,
    handles: Vec<JoinHandle<()>>,
    in_flight: AtomicBool,
}

impl ThreadPool {
    /// Pool with `n_threads` workers, the calling thread included.
    pub fn new(n_threads: usize) -> Result<Self> {
        if n_threads == 0 {
            return Err(Error::Pool("thread count must be >= 1".into()));
        }
        let shared = Arc::new(Shared {
            control: Mutex::new(Control {
                epoch: 0,
                job: None,
                active: 0,
                panic: None,
                shutdown: false,
            }),
            wake: Condvar::new(),
            done: Condvar::new(),
            next: AtomicUsize::new(0),
            abort: AtomicBool::new(false),
            threads: n_threads,
        });
        let mut pool = Self {
            shared,
            handles: Vec::with_capacity(n_threads - 1),
            in_flight: AtomicBool::new(false),
        };
        for worker in 1..n_threads {
            let shared = Arc::clone(&pool.shared);
            let handle = std::thread::Builder::new()
                .name(format!("chunktune-{worker}"))
                .spawn(move || worker_loop(shared, worker))
                .map_err(|e| Error::Pool(format!("spawning worker {worker}: {e}")))?;
            pool.handles.push(handle);
        }
        Ok(pool)
    }

    /// Pool sized from `CHUNKTUNE_THREADS`, or the hardware parallelism when unset.
    pub fn with_default_threads() -> Result<Self> {
        Self::new(default_threads()?)
    }

    pub fn n_threads(&self) -> usize {
        self.shared.threads
    }

    /// Runs `body` over disjoint contiguous subranges exactly covering `[0, n)` and
    /// returns once all of them completed. A panic in `body` stops further claims and is
    /// re-raised here after every worker has stopped.
    ///
    /// # Panics
    ///
    /// If another loop is already in flight on this pool (including a nested call from
    /// inside `body`).
    pub fn parallel_for<F>(&self, n: usize, policy: SchedulePolicy, body: F)
    where
        F: Fn(Range<usize>) + Sync,
    {
        assert!(
            !self.in_flight.swap(true, Ordering::Acquire),
            "parallel_for called while another loop is in flight on this pool"
        );
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| self.dispatch(n, policy, &body)));
        self.in_flight.store(false, Ordering::Release);
        if let Err(payload) = outcome {
            panic::resume_unwind(payload);
        }
    }

    fn dispatch(&self, n: usize, policy: SchedulePolicy, body: &Body<'_>) {
        if n == 0 {
            return;
        }
        let shared = &*self.shared;
        let job = Job {
            // SAFETY: lifetime erasure only; the pointer is not used after the barrier below.
            body: unsafe { std::mem::transmute::<*const Body<'_>, *const Body<'static>>(body) },
            n,
            kind: policy.kind(),
            chunk: policy.resolved_chunk(n, shared.threads),
        };
        shared.next.store(0, Ordering::Relaxed);
        shared.abort.store(false, Ordering::Relaxed);

        if shared.threads == 1 {
            shared.run(0, &job);
            return;
        }

        {
            let mut ctl = shared.control.lock().unwrap();
            ctl.job = Some(job);
            ctl.active = shared.threads - 1;
            ctl.epoch += 1;
            shared.wake.notify_all();
        }
        let own = panic::catch_unwind(AssertUnwindSafe(|| shared.run(0, &job)));
        if own.is_err() {
            shared.abort.store(true, Ordering::Relaxed);
        }
        let worker_panic = {
            let mut ctl = shared.control.lock().unwrap();
            while ctl.active > 0 {
                ctl = shared.done.wait(ctl).unwrap();
            }
            ctl.job = None;
            ctl.panic.take()
        };
        if let Err(payload) = own {
            panic::resume_unwind(payload);
        }
        if let Some(payload) = worker_panic {
            panic::resume_unwind(payload);
        }
    }

    /// Parallel loop over the elements of `data`; `body` receives the offset of its
    /// subslice and exclusive access to it.
    pub fn parallel_for_slice<T, F>(&self, data: &mut [T], policy: SchedulePolicy, body: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync,
    {
        let base = SendPtr(data.as_mut_ptr());
        let len = data.len();
        self.parallel_for(len, policy, |r: Range<usize>| {
            debug_assert!(r.end <= len);
            // SAFETY: the scheduler hands out disjoint ranges within [0, len), and `data`
            // stays mutably borrowed for the duration of the loop.
            let part = unsafe { std::slice::from_raw_parts_mut(base.get().add(r.start), r.len()) };
            body(r.start, part)
        });
    }
}

impl fmt::Debug for ThreadPool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThreadPool")
            .field("n_threads", &self.n_threads())
            .finish()
    }
}

impl Drop for ThreadPool {
    fn drop(&mut self) {
        {
            let mut ctl = self.shared.control.lock().unwrap();
            ctl.shutdown = true;
            self.shared.wake.notify_all();
        }
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

struct SendPtr<T>(*mut T);

impl<T> Clone for SendPtr<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for SendPtr<T> {}

impl<T> SendPtr<T> {
    fn get(self) -> *mut T {
        self.0
    }
}

// SAFETY: only used to hand out disjoint subslices of a `&mut [T]` with `T: Send`.
unsafe impl<T: Send> Sync for SendPtr<T> {}
unsafe impl<T: Send> Send for SendPtr<T> {}

/// Parses a `CHUNKTUNE_THREADS`-style value.
pub fn parse_thread_count(value: &str) -> Result<usize> {
    match value.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::InvalidParameter(format!(
            "{THREADS_ENV} must be a positive integer, got {value:?}"
        ))),
    }
}

/// Thread count from `CHUNKTUNE_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => parse_thread_count(&v).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::InvalidParameter(format!(
            "{THREADS_ENV} is not valid unicode"
        ))),
    }
}

/// `CHUNKTUNE_THREADS` if set, otherwise the hardware parallelism.
pub fn default_threads() -> Result<usize> {
    Ok(threads_from_env()?.unwrap_or_else(hardware_threads))
}

pub fn hardware_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Seconds on a process-wide monotonic clock.
pub fn monotonic_now() -> f64 {
    static EPOCH: OnceLock<Instant> = OnceLock::new();
    EPOCH.get_or_init(Instant::now).elapsed().as_secs_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicU8;

    fn claims(pool: &ThreadPool, n: usize, policy: SchedulePolicy) -> Vec<Range<usize>> {
        let log = Mutex::new(Vec::new());
        pool.parallel_for(n, policy, |r| log.lock().unwrap().push(r));
        let mut v = log.into_inner().unwrap();
        v.sort_by_key(|r| r.start);
        v
    }

    fn assert_exact_cover(ranges: &[Range<usize>], n: usize) {
        let mut next = 0;
        for r in ranges {
            assert_eq!(r.start, next, "gap or overlap in {ranges:?}");
            assert!(r.end > r.start);
            next = r.end;
        }
        assert_eq!(next, n);
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(ThreadPool::new(0).is_err());
    }

    #[test]
    fn single_thread_runs_inline_in_order() {
        let pool = ThreadPool::new(1).unwrap();
        let caller = std::thread::current().id();
        let log = Mutex::new(Vec::new());
        pool.parallel_for(10, SchedulePolicy::dynamic(3).unwrap(), |r| {
            assert_eq!(std::thread::current().id(), caller);
            log.lock().unwrap().push(r);
        });
        assert_eq!(log.into_inner().unwrap(), vec![0..3, 3..6, 6..9, 9..10]);
    }

    #[test]
    fn empty_loop_never_calls_body() {
        let pool = ThreadPool::new(3).unwrap();
        for policy in [
            SchedulePolicy::static_default(),
            SchedulePolicy::dynamic(4).unwrap(),
            SchedulePolicy::guided_default(),
        ] {
            pool.parallel_for(0, policy, |_| panic!("body called for empty range"));
        }
    }

    #[test]
    fn guided_sequence_for_100_on_4_threads() {
        let pool = ThreadPool::new(4).unwrap();
        let lens: Vec<usize> = claims(&pool, 100, SchedulePolicy::guided_default())
            .iter()
            .map(|r| r.len())
            .collect();
        assert_eq!(lens, vec![25, 19, 14, 11, 8, 6, 5, 3, 3, 2, 1, 1, 1, 1]);
        assert_eq!(lens.iter().sum::<usize>(), 100);
    }

    #[test]
    fn dynamic_fixed_chunks() {
        let pool = ThreadPool::new(3).unwrap();
        let got = claims(&pool, 10, SchedulePolicy::dynamic(4).unwrap());
        assert_eq!(got, vec![0..4, 4..8, 8..10]);
    }

    #[test]
    fn static_default_gives_one_range_per_worker() {
        for threads in 1..=6 {
            let pool = ThreadPool::new(threads).unwrap();
            let n = 1003;
            let chunk = SchedulePolicy::static_default().resolved_chunk(n, threads);
            assert_eq!(chunk, n.div_ceil(threads));
            let per_worker = Mutex::new(std::collections::HashMap::new());
            pool.parallel_for(n, SchedulePolicy::static_default(), |r| {
                *per_worker
                    .lock()
                    .unwrap()
                    .entry(std::thread::current().id())
                    .or_insert(0usize) += 1;
                assert!(r.len() <= chunk);
            });
            assert!(per_worker.into_inner().unwrap().values().all(|&c| c == 1));
        }
    }

    #[test]
    fn static_round_robin_assignment() {
        // with 2 threads and chunk 10 over 55 indices, each worker sees blocks j, j+2, ...
        let pool = ThreadPool::new(2).unwrap();
        let by_thread = Mutex::new(std::collections::HashMap::<_, Vec<usize>>::new());
        pool.parallel_for(55, SchedulePolicy::static_chunk(10).unwrap(), |r| {
            by_thread
                .lock()
                .unwrap()
                .entry(std::thread::current().id())
                .or_default()
                .push(r.start / 10);
        });
        let mut sets: Vec<Vec<usize>> = by_thread.into_inner().unwrap().into_values().collect();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 2, 4], vec![1, 3, 5]]);
    }

    #[test]
    fn guided_lengths_non_increasing() {
        let pool = ThreadPool::new(5).unwrap();
        for min in [1, 7, 50] {
            let got = claims(&pool, 10_007, SchedulePolicy::guided(min).unwrap());
            assert_exact_cover(&got, 10_007);
            let lens: Vec<usize> = got.iter().map(|r| r.len()).collect();
            for w in lens[..lens.len() - 1].windows(2) {
                assert!(w[0] >= w[1], "{lens:?}");
            }
            assert!(lens[..lens.len() - 1].iter().all(|&l| l >= min));
        }
    }

    #[test]
    fn exactly_once_coverage() {
        let policies = [
            SchedulePolicy::static_default(),
            SchedulePolicy::static_chunk(7).unwrap(),
            SchedulePolicy::dynamic(1).unwrap(),
            SchedulePolicy::dynamic(64).unwrap(),
            SchedulePolicy::guided_default(),
            SchedulePolicy::guided(13).unwrap(),
        ];
        for threads in [1, 2, 3, 8, 16] {
            let pool = ThreadPool::new(threads).unwrap();
            for n in [1, 2, 17, 1000, 100_000] {
                for policy in policies {
                    let marks: Vec<AtomicU8> = (0..n).map(|_| AtomicU8::new(0)).collect();
                    pool.parallel_for(n, policy, |r| {
                        for i in r {
                            marks[i].fetch_add(1, Ordering::Relaxed);
                        }
                    });
                    assert!(
                        marks.iter().all(|m| m.load(Ordering::Relaxed) == 1),
                        "n={n} threads={threads} policy={policy}"
                    );
                }
            }
        }
    }

    #[test]
    fn results_identical_across_policies() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let reference: Vec<f64> = (0..5000).map(f).collect();
        for threads in [1, 2, 4] {
            let pool = ThreadPool::new(threads).unwrap();
            for policy in [
                SchedulePolicy::static_default(),
                SchedulePolicy::dynamic(33).unwrap(),
                SchedulePolicy::guided_default(),
            ] {
                let mut out = vec![0.0; 5000];
                pool.parallel_for_slice(&mut out, policy, |off, s| {
                    for (k, v) in s.iter_mut().enumerate() {
                        *v = f(off + k);
                    }
                });
                assert!(out
                    .iter()
                    .zip(&reference)
                    .all(|(a, b)| a.to_bits() == b.to_bits()));
            }
        }
    }

    #[test]
    fn panic_propagates_and_pool_recovers() {
        let pool = ThreadPool::new(4).unwrap();
        let hit = AtomicUsize::new(0);
        let result = panic::catch_unwind(AssertUnwindSafe(|| {
            pool.parallel_for(1000, SchedulePolicy::dynamic(10).unwrap(), |r| {
                hit.fetch_add(1, Ordering::Relaxed);
                if r.start == 500 {
                    panic!("boom");
                }
            })
        }));
        assert!(result.is_err());
        assert!(hit.load(Ordering::Relaxed) <= 100);
        let sum = AtomicUsize::new(0);
        pool.parallel_for(100, SchedulePolicy::static_default(), |r| {
            sum.fetch_add(r.len(), Ordering::Relaxed);
        });
        assert_eq!(sum.load(Ordering::Relaxed), 100);
    }

    #[test]
    fn nested_loop_is_rejected() {
        let pool = ThreadPool::new(2).unwrap();
        let result = panic::catch_unwind(AssertUnwindSafe(|| {
            pool.parallel_for(4, SchedulePolicy::static_default(), |_| {
                pool.parallel_for(1, SchedulePolicy::static_default(), |_| {});
            })
        }));
        let msg = result.unwrap_err();
        let msg = msg
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| msg.downcast_ref::<String>().cloned())
            .unwrap();
        assert!(msg.contains("in flight"), "{msg}");
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(
            "static".parse::<SchedulePolicy>().unwrap(),
            SchedulePolicy::static_default()
        );
        assert_eq!(
            "auto".parse::<SchedulePolicy>().unwrap(),
            SchedulePolicy::static_default()
        );
        assert_eq!(
            "guided".parse::<SchedulePolicy>().unwrap(),
            SchedulePolicy::guided_default()
        );
        assert_eq!(
            "dynamic:1024".parse::<SchedulePolicy>().unwrap(),
            SchedulePolicy::dynamic(1024).unwrap()
        );
        let err = "dynamic".parse::<SchedulePolicy>().unwrap_err();
        assert!(err.to_string().contains("dynamic requires chunk"));
        assert!("dynamic:0".parse::<SchedulePolicy>().is_err());
        assert!("fancy".parse::<SchedulePolicy>().is_err());
        for p in ["static", "static:9", "guided:4", "dynamic:77"] {
            assert_eq!(p.parse::<SchedulePolicy>().unwrap().to_string(), p);
        }
    }

    #[test]
    fn thread_count_parsing() {
        assert_eq!(parse_thread_count("4").unwrap(), 4);
        assert_eq!(parse_thread_count(" 2 ").unwrap(), 2);
        assert!(parse_thread_count("0").is_err());
        assert!(parse_thread_count("-1").is_err());
        assert!(parse_thread_count("four").is_err());
    }

    #[test]
    fn clock_is_monotonic() {
        let t1 = monotonic_now();
        let t2 = monotonic_now();
        assert!(t2 >= t1);
        let a = monotonic_now();
        let empty = monotonic_now() - a;
        assert!(empty >= 0.0);
    }

    #[test]
    fn clock_measures_sleep() {
        let t1 = monotonic_now();
        std::thread::sleep(std::time::Duration::from_millis(10));
        let dt = monotonic_now() - t1;
        assert!((0.009..=0.1).contains(&dt), "{dt}");
    }
}
