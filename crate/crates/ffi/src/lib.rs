//! C ABI over `rforge-core`.
//!
//! Every fallible call returns an [`RfStatus`] and writes its result through
//! an out pointer. Objects cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free`. Strings returned to C are
//! owned by the caller too (`rf_string_free`). After a failure,
//! `rf_last_error` describes it until the next call on the same thread.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rforge_core::engine::{
    derive_from_premises, generate_fragment, load_fragment, save_fragment, DegreeCaps,
    DerivationLimits, DeriveOptions, DerivedSet, Fragment,
};
use rforge_core::formula::{
    classify_formula, degree_vector, is_variant, strong_relevance_holds, variable_sharing_holds,
};
use rforge_core::logic::{load_logic_file, LogicSystem};
use rforge_core::pipeline::{run_pipeline, PipelineManifest, RunOptions};
use rforge_core::theory::parse_premises;
use rforge_core::{parse_formula, render_formula, Connective, DegreeVector, Formula};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Logic = 4,
    Engine = 5,
    /// `rf_formula_variable_sharing` on a formula that is not a conditional.
    NotAConditional = 6,
    Io = 7,
    OutOfRange = 8,
    Pipeline = 9,
    Panic = 10,
}

/// Parsed formula.
pub struct RfFormula(Formula);

/// Loaded logic: axioms plus rules.
pub struct RfLogic(LogicSystem);

/// Saturated logic fragment.
pub struct RfFragment(Fragment);

/// Result of `rf_derive`. Indexing covers premises and derived theorems.
pub struct RfDerivation {
    set: DerivedSet,
    theorems: Vec<usize>,
}

/// Degree of each connective: `=>`, `&`, `|`, `~`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RfDegrees {
    pub entail: u32,
    pub conj: u32,
    pub disj: u32,
    pub neg: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RfStatus, String);

impl Failure {
    fn new(status: RfStatus, message: impl ToString) -> Failure {
        Failure(status, message.to_string())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording the error message and trapping panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {message}"));
            RfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(RfStatus::NullArgument, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(RfStatus::InvalidUtf8, e))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(RfStatus::NullArgument, "null handle"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(RfStatus::NullArgument, "null out pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::new(RfStatus::NullArgument, "null out pointer"))
    } else {
        Ok(())
    }
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

fn caps(text: &str) -> Result<DegreeVector, Failure> {
    DegreeVector::parse(text).map_err(|e| Failure::new(RfStatus::Parse, e))
}

fn limits(max_depth: u32) -> DerivationLimits {
    let l = DerivationLimits::default();
    if max_depth == 0 {
        l
    } else {
        l.with_depth(max_depth)
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call; do not free.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rf_formula_parse(
    src: *const c_char,
    out: *mut *mut RfFormula,
) -> RfStatus {
    guard(|| {
        check_out(out)?;
        let f = parse_formula(text(src)?).map_err(|e| Failure::new(RfStatus::Parse, e))?;
        put(out, Box::into_raw(Box::new(RfFormula(f))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_formula_free(f: *mut RfFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Renders with minimal parentheses. Free the result with `rf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rf_formula_render(f: *const RfFormula, out: *mut *mut c_char) -> RfStatus {
    guard(|| {
        let f = handle(f)?;
        put(out, owned(render_formula(&f.0)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_formula_degrees(f: *const RfFormula, out: *mut RfDegrees) -> RfStatus {
    guard(|| {
        let d = degree_vector(&handle(f)?.0);
        put(
            out,
            RfDegrees {
                entail: d.get(Connective::Entail),
                conj: d.get(Connective::And),
                disj: d.get(Connective::Or),
                neg: d.get(Connective::Not),
            },
        )
    })
}

/// `zero-degree`, `first-degree` or `kth-degree(k)`.
#[no_mangle]
pub unsafe extern "C" fn rf_formula_classify(
    f: *const RfFormula,
    out: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let class = classify_formula(&handle(f)?.0);
        put(out, owned(class.to_string()))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_formula_strong_relevance(
    f: *const RfFormula,
    out: *mut bool,
) -> RfStatus {
    guard(|| put(out, strong_relevance_holds(&handle(f)?.0)))
}

#[no_mangle]
pub unsafe extern "C" fn rf_formula_variable_sharing(
    f: *const RfFormula,
    out: *mut bool,
) -> RfStatus {
    guard(|| {
        let shares = variable_sharing_holds(&handle(f)?.0)
            .map_err(|e| Failure::new(RfStatus::NotAConditional, e))?;
        put(out, shares)
    })
}

/// Equal up to renaming of schema atoms and bound variables.
#[no_mangle]
pub unsafe extern "C" fn rf_formula_is_variant(
    a: *const RfFormula,
    b: *const RfFormula,
    out: *mut bool,
) -> RfStatus {
    guard(|| put(out, is_variant(&handle(a)?.0, &handle(b)?.0)))
}

/// Loads a logic file, or a bundled one as `preset:<name>`.
#[no_mangle]
pub unsafe extern "C" fn rf_logic_load(source: *const c_char, out: *mut *mut RfLogic) -> RfStatus {
    guard(|| {
        check_out(out)?;
        let logic = load_logic_file(Path::new(text(source)?))
            .map_err(|e| Failure::new(RfStatus::Logic, e))?;
        put(out, Box::into_raw(Box::new(RfLogic(logic))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_logic_free(l: *mut RfLogic) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Saturates the axioms under `caps` (e.g. `"=>:2,&:1"`; unlisted
/// connectives are capped at 0). `max_depth` 0 keeps the default.
#[no_mangle]
pub unsafe extern "C" fn rf_fragment_generate(
    logic: *const RfLogic,
    caps_text: *const c_char,
    max_depth: u32,
    out: *mut *mut RfFragment,
) -> RfStatus {
    guard(|| {
        check_out(out)?;
        let logic = handle(logic)?;
        let caps = caps(text(caps_text)?)?;
        let fragment = generate_fragment(&logic.0, &caps, &limits(max_depth))
            .map_err(|e| Failure::new(RfStatus::Engine, e))?;
        put(out, Box::into_raw(Box::new(RfFragment(fragment))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_fragment_load(
    logic: *const RfLogic,
    path: *const c_char,
    out: *mut *mut RfFragment,
) -> RfStatus {
    guard(|| {
        check_out(out)?;
        let logic = handle(logic)?;
        let fragment = load_fragment(Path::new(text(path)?), &logic.0)
            .map_err(|e| Failure::new(RfStatus::Io, e))?;
        put(out, Box::into_raw(Box::new(RfFragment(fragment))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_fragment_save(f: *const RfFragment, path: *const c_char) -> RfStatus {
    guard(|| {
        let f = handle(f)?;
        save_fragment(&f.0, Path::new(text(path)?)).map_err(|e| Failure::new(RfStatus::Io, e))
    })
}

/// Active members, subsumed ones excluded.
#[no_mangle]
pub unsafe extern "C" fn rf_fragment_len(f: *const RfFragment, out: *mut usize) -> RfStatus {
    guard(|| put(out, handle(f)?.0.len()))
}

#[no_mangle]
pub unsafe extern "C" fn rf_fragment_free(f: *mut RfFragment) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Forward saturation of `premises` (one `label: formula` per line) with
/// the fragment. `caps_text` bounds rule results. `max_depth` 0 keeps the
/// default; `workers` 0 uses one thread per core.
#[no_mangle]
pub unsafe extern "C" fn rf_derive(
    logic: *const RfLogic,
    fragment: *const RfFragment,
    premises: *const c_char,
    caps_text: *const c_char,
    max_depth: u32,
    workers: u32,
    out: *mut *mut RfDerivation,
) -> RfStatus {
    guard(|| {
        check_out(out)?;
        let logic = handle(logic)?;
        let fragment = handle(fragment)?;
        let premises = parse_premises(text(premises)?).map_err(|e| {
            let status = if e.is_parse() {
                RfStatus::Parse
            } else {
                RfStatus::Engine
            };
            Failure::new(status, e)
        })?;
        let caps = DegreeCaps::exact(&caps(text(caps_text)?)?);
        let options = DeriveOptions {
            workers: workers as usize,
            ..DeriveOptions::default()
        };
        let set = derive_from_premises(
            &fragment.0,
            &logic.0.rules,
            &premises,
            &caps,
            &limits(max_depth),
            &options,
        )
        .map_err(|e| Failure::new(RfStatus::Engine, e))?;
        let theorems = set.theorems().map(|r| r.id).collect();
        put(out, Box::into_raw(Box::new(RfDerivation { set, theorems })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_derivation_len(d: *const RfDerivation, out: *mut usize) -> RfStatus {
    guard(|| put(out, handle(d)?.theorems.len()))
}

/// False when a limit cut the run short.
#[no_mangle]
pub unsafe extern "C" fn rf_derivation_complete(
    d: *const RfDerivation,
    out: *mut bool,
) -> RfStatus {
    guard(|| put(out, handle(d)?.set.status.complete))
}

/// The `index`-th theorem in id order. Free with `rf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rf_derivation_formula(
    d: *const RfDerivation,
    index: usize,
    out: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let d = handle(d)?;
        let id = *d.theorems.get(index).ok_or_else(|| {
            Failure::new(
                RfStatus::OutOfRange,
                format!("index {index} of {}", d.theorems.len()),
            )
        })?;
        let record = d
            .set
            .records
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| Failure::new(RfStatus::Panic, "record vanished"))?;
        put(out, owned(render_formula(&record.formula)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rf_derivation_free(d: *mut RfDerivation) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Runs a manifest end to end and stores the CLI exit code in `exit_code`
/// (0 done, 4 truncated). Setup failures return `RF_STATUS_PIPELINE` with
/// their exit code stored as well.
#[no_mangle]
pub unsafe extern "C" fn rf_pipeline_run(
    manifest: *const c_char,
    workers: u32,
    exit_code: *mut i32,
) -> RfStatus {
    guard(|| {
        check_out(exit_code)?;
        let result = PipelineManifest::load(Path::new(text(manifest)?)).and_then(|m| {
            run_pipeline(
                &m,
                &RunOptions {
                    workers: workers as usize,
                },
            )
        });
        match result {
            Ok(outcome) => put(exit_code, outcome.exit_code()),
            Err(e) => {
                put(exit_code, e.exit_code())?;
                Err(Failure::new(RfStatus::Pipeline, e))
            }
        }
    })
}
