//! C ABI for the newsstock pipeline.
//!
//! Every fallible function returns an [`NsStatus`]; on failure a message is
//! kept per thread and can be read with [`ns_last_error`]. Objects are opaque
//! handles released by their `_free` function. Strings returned to the
//! caller are released with [`ns_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use chrono::NaiveDate;
use newsstock::config::RunConfig;
use newsstock::dataset::Instance;
use newsstock::harness::{gen_synthetic, pearson, SynthParams};
use newsstock::models::{fit, Hyperparams, ModelKind, TrainedModel};
use newsstock::pipeline::Pipeline;
use newsstock::sentiment::{change_rate, normalize_series, score_terms, Lexicon};
use newsstock::textprep::{clean_text, levenshtein, title_similarity};
use newsstock::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    Model = 6,
    /// The result is mathematically undefined, e.g. a zero-variance correlation.
    Undefined = 7,
    Config = 8,
    Pipeline = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsModelKind {
    Gp = 0,
    Lr = 1,
    Mlp = 2,
    SmoReg = 3,
    Rf = 4,
}

impl From<NsModelKind> for ModelKind {
    fn from(k: NsModelKind) -> Self {
        match k {
            NsModelKind::Gp => ModelKind::Gp,
            NsModelKind::Lr => ModelKind::Lr,
            NsModelKind::Mlp => ModelKind::Mlp,
            NsModelKind::SmoReg => ModelKind::SmoReg,
            NsModelKind::Rf => ModelKind::Rf,
        }
    }
}

/// Opaque sentiment lexicon.
pub struct NsLexicon(Lexicon);

/// Opaque trained model.
pub struct NsModel(TrainedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(NsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => NsStatus::Io,
            Error::MissingField { .. } | Error::Malformed { .. } | Error::Embedding { .. } => NsStatus::Parse,
            Error::Model(_) => NsStatus::Model,
            Error::Config(_) => NsStatus::Config,
            _ => NsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: NsStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, recording any failure or panic in the thread's error slot.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(NsStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NsStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(NsStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(NsStatus::NullPointer, format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Edit distance between two UTF-8 strings, counted in Unicode scalar values.
///
/// # Safety
/// `a` and `b` must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> NsStatus {
    guard(|| {
        let d = levenshtein(str_arg(a, "a")?, str_arg(b, "b")?);
        write_out(out, d, "out")
    })
}

/// `1 - levenshtein / max(len)`.
///
/// # Safety
/// As [`ns_levenshtein`].
#[no_mangle]
pub unsafe extern "C" fn ns_title_similarity(a: *const c_char, b: *const c_char, out: *mut f64) -> NsStatus {
    guard(|| {
        let s = title_similarity(str_arg(a, "a")?, str_arg(b, "b")?);
        write_out(out, s, "out")
    })
}

/// Lowercases and strips markup, URLs and punctuation. The result must be
/// released with [`ns_string_free`].
///
/// # Safety
/// `raw` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_clean_text(raw: *const c_char, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let cleaned = clean_text(str_arg(raw, "raw")?);
        write_out(out, into_c_string(cleaned), "out")
    })
}

/// The bundled opinion lexicon.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_lexicon_bundled(out: *mut *mut NsLexicon) -> NsStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(NsLexicon(Lexicon::bundled()))), "out"))
}

/// Loads a lexicon from positive and negative word-list files.
///
/// # Safety
/// Paths must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_lexicon_from_files(
    positive: *const c_char,
    negative: *const c_char,
    out: *mut *mut NsLexicon,
) -> NsStatus {
    guard(|| {
        let lex = Lexicon::from_files(str_arg(positive, "positive")?, str_arg(negative, "negative")?)?;
        write_out(out, Box::into_raw(Box::new(NsLexicon(lex))), "out")
    })
}

/// `#positive - #negative` over the whitespace-separated words of `text`.
///
/// # Safety
/// `lex` must be a live handle, `text` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_lexicon_score(lex: *const NsLexicon, text: *const c_char, out: *mut i64) -> NsStatus {
    guard(|| {
        let lex = lex.as_ref().ok_or_else(|| fail(NsStatus::NullPointer, "lexicon is null"))?;
        let text = str_arg(text, "text")?;
        write_out(out, score_terms(&[text], &lex.0), "out")
    })
}

/// # Safety
/// `lex` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_lexicon_free(lex: *mut NsLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Percent change from `prev` to `cur`; a zero `prev` divides by one.
#[no_mangle]
pub extern "C" fn ns_change_rate(prev: f64, cur: f64) -> f64 {
    change_rate(prev, cur)
}

/// Min-max normalization of `len` values to `[-1, 1]`, written to `out`
/// (which may alias `values`).
///
/// # Safety
/// `values` and `out` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_normalize_series(values: *const f64, len: usize, out: *mut f64) -> NsStatus {
    guard(|| {
        let v = slice_arg(values, len, "values")?.to_vec();
        if len > 0 && out.is_null() {
            return Err(fail(NsStatus::NullPointer, "out is null"));
        }
        for (i, x) in normalize_series(&v).into_iter().enumerate() {
            out.add(i).write(x);
        }
        Ok(())
    })
}

/// Sample Pearson correlation. Returns `Undefined` if either side is constant.
///
/// # Safety
/// `pred` and `actual` must each hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_pearson(pred: *const f64, actual: *const f64, len: usize, out: *mut f64) -> NsStatus {
    guard(|| {
        let r = pearson(slice_arg(pred, len, "pred")?, slice_arg(actual, len, "actual")?)?;
        match r {
            Some(r) => write_out(out, r, "out"),
            None => Err(fail(NsStatus::Undefined, "correlation undefined: constant input")),
        }
    })
}

/// Fits a model on `n` row-major instances of `d` features.
///
/// `hyperparams_json` may be null for defaults; otherwise it is a JSON object
/// with optional `gp`, `lr`, `mlp`, `smoreg` and `rf` sections. `seed`
/// reseeds the randomized learners. With `sign_targets` the targets are
/// treated as -1/+1 class labels.
///
/// # Safety
/// `xs` must hold `n * d` doubles, `ys` `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_model_fit(
    kind: NsModelKind,
    xs: *const f64,
    ys: *const f64,
    n: usize,
    d: usize,
    sign_targets: bool,
    seed: u64,
    hyperparams_json: *const c_char,
    out: *mut *mut NsModel,
) -> NsStatus {
    guard(|| {
        let total = n
            .checked_mul(d)
            .ok_or_else(|| fail(NsStatus::InvalidArgument, "n * d overflows"))?;
        let xs = slice_arg(xs, total, "xs")?;
        let ys = slice_arg(ys, n, "ys")?;
        let hp: Hyperparams = if hyperparams_json.is_null() {
            Hyperparams::default()
        } else {
            serde_json::from_str(str_arg(hyperparams_json, "hyperparams_json")?)
                .map_err(|e| fail(NsStatus::Parse, format!("hyperparams: {e}")))?
        };
        let base = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let train: Vec<Instance> = (0..n)
            .map(|i| Instance {
                base_date: base + chrono::Days::new(i as u64),
                x: xs[i * d..(i + 1) * d].to_vec(),
                y: ys[i],
            })
            .collect();
        let model = fit(kind.into(), &train, &hp.with_seed(seed), sign_targets)?;
        write_out(out, Box::into_raw(Box::new(NsModel(model))), "out")
    })
}

/// # Safety
/// `model` must be a live handle, `x` must hold `d` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_model_predict(model: *const NsModel, x: *const f64, d: usize, out: *mut f64) -> NsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(NsStatus::NullPointer, "model is null"))?;
        let y = m.0.predict(slice_arg(x, d, "x")?)?;
        write_out(out, y, "out")
    })
}

/// Number of input features, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_model_n_features(model: *const NsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_features())
}

/// Writes the model as JSON.
///
/// # Safety
/// `model` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ns_model_save(model: *const NsModel, path: *const c_char) -> NsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(NsStatus::NullPointer, "model is null"))?;
        m.0.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_model_load(path: *const c_char, out: *mut *mut NsModel) -> NsStatus {
    guard(|| {
        let m = TrainedModel::load(str_arg(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(NsModel(m))), "out")
    })
}

/// # Safety
/// `model` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ns_model_free(model: *mut NsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Generates a synthetic market and writes it as
/// `date,close,volume,sentiment,article_count` CSV.
///
/// # Safety
/// `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ns_synthetic_write(
    seed: u64,
    n_days: usize,
    lag: usize,
    coupling: f64,
    noise_sd: f64,
    path: *const c_char,
) -> NsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let series = gen_synthetic(&SynthParams {
            seed,
            n_days,
            lag,
            coupling,
            noise_sd,
        })?;
        series.save_csv(path)?;
        Ok(())
    })
}

/// Runs the full pipeline for a TOML config. `out_dir` may be null to use
/// the configured output directory. The CSV report is returned in
/// `report_csv` (release with [`ns_string_free`]) unless it is null.
///
/// # Safety
/// Strings must be nul-terminated; `report_csv` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ns_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    report_csv: *mut *mut c_char,
) -> NsStatus {
    guard(|| {
        let mut cfg = RunConfig::load(str_arg(config_path, "config_path")?)?;
        if !out_dir.is_null() {
            cfg.out_dir = PathBuf::from(str_arg(out_dir, "out_dir")?);
        }
        let table = Pipeline::new(cfg)
            .run()
            .map_err(|e| fail(NsStatus::Pipeline, e.to_string()))?;
        if !report_csv.is_null() {
            report_csv.write(into_c_string(table.render_csv()));
        }
        Ok(())
    })
}
