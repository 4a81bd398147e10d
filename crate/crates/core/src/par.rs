//! Data-parallel helpers. With the `parallel` feature disabled every mode runs
//! sequentially.

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon's global pool, or a dedicated pool of the given size.
    #[default]
    Rayon,
}

impl Exec {
    pub fn available() -> &'static [Exec] {
        if cfg!(feature = "parallel") {
            &[Exec::Sequential, Exec::Rayon]
        } else {
            &[Exec::Sequential]
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => items.iter().map(f).collect(),
        Exec::Rayon => par_map(items, f),
    }
}

/// Like [`map`] but limited to `jobs` worker threads.
pub fn map_jobs<T, R, F>(exec: Exec, jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if exec == Exec::Sequential || jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    pooled(jobs, items, f)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn pooled<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(jobs: usize, items: &[T], f: F) -> Vec<R> {
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("falling back to sequential execution: {e}");
            items.iter().map(f).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn pooled<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(_jobs: usize, items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..100).collect();
        let a = map(Exec::Sequential, &xs, |x| x * x);
        let b = map(Exec::Rayon, &xs, |x| x * x);
        let c = map_jobs(Exec::Rayon, 3, &xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
