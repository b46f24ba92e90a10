//! Binary gram cache: a header with the candidate count, dataset labels and
//! kernel components, then `K_UU`, every `mu_t` and every `c_t` as
//! little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use dmmd_core::{GramCache, KernelComponent, KernelModel};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"DMMDGRAM";
const VERSION: u32 = 1;

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    put_u64(w, s.len() as u64)?;
    w.write_all(s.as_bytes())
}

fn put_f64s(w: &mut impl Write, xs: &[f64]) -> std::io::Result<()> {
    xs.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))
}

pub fn write_cache(path: &Path, cache: &GramCache) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    (|| -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        put_u64(&mut w, cache.num_candidates() as u64)?;
        put_u64(&mut w, cache.num_datasets() as u64)?;
        for (label, &n) in cache.labels().iter().zip(cache.sizes()) {
            put_str(&mut w, label)?;
            put_u64(&mut w, n as u64)?;
        }
        let comps = cache.kernel().components();
        put_u64(&mut w, comps.len() as u64)?;
        for c in comps {
            put_str(&mut w, &c.tag)?;
            w.write_all(&c.bandwidth.to_le_bytes())?;
        }
        for &r in cache.candidate_rows() {
            put_u64(&mut w, r as u64)?;
        }
        put_f64s(&mut w, cache.kuu())?;
        for t in 0..cache.num_datasets() {
            put_f64s(&mut w, cache.mu(t))?;
        }
        put_f64s(&mut w, cache.c_all())?;
        w.flush()
    })()
    .map_err(io)
}

struct Src<R> {
    r: R,
}

impl<R: Read> Src<R> {
    fn bytes<const N: usize>(&mut self) -> std::io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.r.read_exact(&mut b)?;
        Ok(b)
    }

    fn u64(&mut self) -> std::io::Result<u64> {
        self.bytes::<8>().map(u64::from_le_bytes)
    }

    fn len(&mut self, what: &str) -> std::io::Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v < 1 << 40)
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("implausible {what} {v}")))
    }

    fn f64(&mut self) -> std::io::Result<f64> {
        self.bytes::<8>().map(f64::from_le_bytes)
    }

    fn f64s(&mut self, n: usize) -> std::io::Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn string(&mut self) -> std::io::Result<String> {
        let n = self.len("string length")?;
        let mut b = vec![0u8; n];
        self.r.read_exact(&mut b)?;
        String::from_utf8(b).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

pub fn read_cache(path: &Path) -> Result<GramCache> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut s = Src { r: BufReader::new(file) };
    let bad = |m: String| Error::format(path, 0, m);
    let parts = (|| -> std::io::Result<_> {
        let magic = s.bytes::<8>()?;
        let version = u32::from_le_bytes(s.bytes::<4>()?);
        if &magic != MAGIC || version != VERSION {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "not a gram cache file of a supported version",
            ));
        }
        let n_u = s.len("candidate count")?;
        let n_t = s.len("dataset count")?;
        let mut labels = Vec::with_capacity(n_t);
        let mut sizes = Vec::with_capacity(n_t);
        for _ in 0..n_t {
            labels.push(s.string()?);
            sizes.push(s.len("dataset size")?);
        }
        let n_c = s.len("component count")?;
        let mut comps = Vec::with_capacity(n_c);
        for _ in 0..n_c {
            let tag = s.string()?;
            comps.push(KernelComponent {
                bandwidth: s.f64()?,
                tag,
            });
        }
        let rows = (0..n_u).map(|_| s.len("row")).collect::<std::io::Result<Vec<_>>>()?;
        let kuu = s.f64s(n_u * n_u)?;
        let mu = (0..n_t).map(|_| s.f64s(n_u)).collect::<std::io::Result<Vec<_>>>()?;
        let c = s.f64s(n_t)?;
        let mut rest = Vec::new();
        s.r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "trailing bytes"));
        }
        Ok((comps, labels, sizes, rows, kuu, mu, c))
    })()
    .map_err(|e| bad(e.to_string()))?;
    let (comps, labels, sizes, rows, kuu, mu, c) = parts;
    let kernel = KernelModel::new(comps)?;
    Ok(GramCache::from_parts(kernel, labels, sizes, rows, kuu, mu, c)?)
}
