//! C ABI over `lpa_bridge`. Objects cross the boundary as opaque handles,
//! structured data as UTF-8 JSON strings in the library's wire formats.
//! Every function returns an [`LpaStatus`]; on failure the message is
//! available from [`lpa_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use lpa_bridge::bimodule::{conjugacy_failure, epsilon, ConjugacyPair};
use lpa_bridge::bridge::{verify_ck_on_bridge, Bridge, Generator};
use lpa_bridge::com::com_failure;
use lpa_bridge::graph::Graph;
use lpa_bridge::json::{
    bridge_element_from_json, bridge_element_to_json, element_from_json, element_to_json, BridgeTermJson, ComJson,
    GraphJson, MatrixJson, PairJson, TermJson, WitnessJson,
};
use lpa_bridge::lpa::Leavitt;
use lpa_bridge::scalar::Field;
use lpa_bridge::shift_equiv::{se_failure, search_se};
use lpa_bridge::Error;

/// Result of every exported call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInput = 4,
    Panic = 5,
}

/// A directed graph.
pub struct LpaGraph(Graph);

/// A specified conjugacy pair.
pub struct LpaPair(ConjugacyPair);

/// The bridging bimodule of a conjugacy pair.
pub struct LpaBridge(Arc<Bridge>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LpaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse(_) => LpaStatus::ParseError,
            _ => LpaStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(LpaStatus::ParseError, e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> Outcome<()>) -> LpaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LpaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LpaStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Outcome<&'a str> {
    if s.is_null() {
        return Err(Failure(LpaStatus::NullArgument, format!("{what} is null")));
    }
    // SAFETY: non-null and NUL-terminated per the caller's contract.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| Failure(LpaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `field` must be null or a valid NUL-terminated string.
unsafe fn read_field(field: *const c_char) -> Outcome<Field> {
    if field.is_null() {
        return Ok(Field::Rational);
    }
    // SAFETY: forwarded contract.
    Ok(unsafe { read_str(field, "field") }?.parse::<Field>()?)
}

/// # Safety
/// `p` must be null or point to a live handle created by this library.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    // SAFETY: forwarded contract.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(LpaStatus::NullArgument, format!("{what} is null")))
}

fn require_out<T>(out: *mut T) -> Outcome<()> {
    if out.is_null() {
        return Err(Failure(LpaStatus::NullArgument, "output pointer is null".into()));
    }
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn write_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Outcome<()> {
    let s = serde_json::to_string(value)?;
    // SAFETY: `out` was checked non-null by the caller of this helper.
    unsafe { *out = into_c_string(s) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lpa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lpa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpa_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a graph from `{"vertices": [...], "edges": [...]}`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_graph_from_json(json: *const c_char, out: *mut *mut LpaGraph) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let text = unsafe { read_str(json, "json") }?;
        let g = serde_json::from_str::<GraphJson>(text)?.to_graph()?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(LpaGraph(g))) };
        Ok(())
    })
}

/// Writes the adjacency matrix of `graph` as matrix JSON.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer. Free the result
/// with [`lpa_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lpa_graph_adjacency_json(graph: *const LpaGraph, out: *mut *mut c_char) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let g = unsafe { handle(graph, "graph") }?;
        write_json(&MatrixJson::from_matrix(&g.0.adjacency()), out)
    })
}

/// # Safety
/// `graph` must be null or a handle from [`lpa_graph_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpa_graph_free(graph: *mut LpaGraph) {
    if !graph.is_null() {
        // SAFETY: allocated by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Parses a conjugacy pair `{"E", "F", "M", "sigma"}` over `field`
/// (`"rational"`, `"gfp:<p>"`, or null for the rationals).
///
/// # Safety
/// `json` must be a valid NUL-terminated string, `field` null or one, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_pair_from_json(
    json: *const c_char,
    field: *const c_char,
    out: *mut *mut LpaPair,
) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let (text, field) = unsafe { (read_str(json, "json")?, read_field(field)?) };
        let p = serde_json::from_str::<PairJson>(text)?.to_pair(field)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(LpaPair(p))) };
        Ok(())
    })
}

/// The identity pair of `graph`.
///
/// # Safety
/// `graph` must be a live handle, `field` null or a valid string, and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_pair_identity(
    graph: *const LpaGraph,
    field: *const c_char,
    out: *mut *mut LpaPair,
) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let (g, field) = unsafe { (handle(graph, "graph")?, read_field(field)?) };
        let p = epsilon(&g.0, field);
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(LpaPair(p))) };
        Ok(())
    })
}

/// Sets `*ok` to 1 when σ is invertible, 0 otherwise.
///
/// # Safety
/// `pair` must be a live handle and `ok` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_pair_verify(pair: *const LpaPair, ok: *mut c_int) -> LpaStatus {
    guard(|| {
        require_out(ok)?;
        // SAFETY: caller contract.
        let p = unsafe { handle(pair, "pair") }?;
        let failure = conjugacy_failure(&p.0);
        // SAFETY: checked non-null above.
        unsafe { *ok = c_int::from(failure.is_none()) };
        Ok(())
    })
}

/// # Safety
/// `pair` must be null or a pair handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpa_pair_free(pair: *mut LpaPair) {
    if !pair.is_null() {
        // SAFETY: allocated by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(pair) });
    }
}

/// Builds the bridging bimodule of a verified pair over sink-free graphs.
///
/// # Safety
/// `pair` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_bridge_new(pair: *const LpaPair, out: *mut *mut LpaBridge) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let p = unsafe { handle(pair, "pair") }?;
        let b = Bridge::new(p.0.clone())?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(LpaBridge(b))) };
        Ok(())
    })
}

/// Checks the Cuntz–Krieger relations on basis elements `m ⊗ αβ*` with
/// `|α|, |β| <= length_bound`. Sets `*ok` and, when `report` is non-null,
/// writes a JSON summary with the first violation of each relation.
///
/// # Safety
/// `bridge` must be a live handle, `ok` a valid pointer, `report` null or a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_bridge_verify_ck(
    bridge: *const LpaBridge,
    length_bound: usize,
    ok: *mut c_int,
    report: *mut *mut c_char,
) -> LpaStatus {
    guard(|| {
        require_out(ok)?;
        // SAFETY: caller contract.
        let b = unsafe { handle(bridge, "bridge") }?;
        let r = verify_ck_on_bridge(&b.0, length_bound, None);
        // SAFETY: checked non-null above.
        unsafe { *ok = c_int::from(r.passed()) };
        if !report.is_null() {
            let violations: Vec<String> = r.violations.iter().map(ToString::to_string).collect();
            let summary = serde_json::json!({
                "basis_size": r.basis_size,
                "checks": r.checks,
                "failures": r.failures,
                "violations": violations,
            });
            write_json(&summary, report)?;
        }
        Ok(())
    })
}

/// Left action of a generator (`"v"`, `"e"` or `"e*"`) on a bridge element
/// given as a list of `{"m", "alpha", "beta", "coeff"}` terms.
///
/// # Safety
/// `bridge` must be a live handle, `generator` and `element` valid strings,
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_bridge_act_json(
    bridge: *const LpaBridge,
    generator: *const c_char,
    element: *const c_char,
    out: *mut *mut c_char,
) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let (b, generator, element) = unsafe {
            (
                handle(bridge, "bridge")?,
                read_str(generator, "generator")?,
                read_str(element, "element")?,
            )
        };
        let g = Generator::parse(b.0.source(), generator)?;
        let y = bridge_element_from_json(&b.0, &serde_json::from_str::<Vec<BridgeTermJson>>(element)?)?;
        write_json(&bridge_element_to_json(&y.left_act(g)), out)
    })
}

/// # Safety
/// `bridge` must be null or a bridge handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpa_bridge_free(bridge: *mut LpaBridge) {
    if !bridge.is_null() {
        // SAFETY: allocated by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(bridge) });
    }
}

/// Normal form of an element of `L_k(E)` given as a list of
/// `{"alpha", "beta", "coeff"}` terms.
///
/// # Safety
/// `graph` must be a live handle, `element` a valid string, `field` null or
/// a valid string, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_normalize_json(
    graph: *const LpaGraph,
    element: *const c_char,
    field: *const c_char,
    out: *mut *mut c_char,
) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let (g, element, field) = unsafe {
            (
                handle(graph, "graph")?,
                read_str(element, "element")?,
                read_field(field)?,
            )
        };
        let alg = Leavitt::new(g.0.clone(), field);
        let x = element_from_json(&alg, &serde_json::from_str::<Vec<TermJson>>(element)?)?;
        write_json(&element_to_json(&x), out)
    })
}

/// Sets `*ok` to 1 when `{"R", "S", "n"}` is a shift equivalence from `a`
/// to `b` (matrix JSON).
///
/// # Safety
/// `a`, `b` and `witness` must be valid strings and `ok` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_se_verify_json(
    a: *const c_char,
    b: *const c_char,
    witness: *const c_char,
    ok: *mut c_int,
) -> LpaStatus {
    guard(|| {
        require_out(ok)?;
        // SAFETY: caller contract.
        let (a, b, w) = unsafe { (read_str(a, "a")?, read_str(b, "b")?, read_str(witness, "witness")?) };
        let a = serde_json::from_str::<MatrixJson>(a)?.to_matrix()?;
        let b = serde_json::from_str::<MatrixJson>(b)?.to_matrix()?;
        let w = serde_json::from_str::<WitnessJson>(w)?.to_witness()?;
        let failure = se_failure(&a, &b, &w)?;
        // SAFETY: checked non-null above.
        unsafe { *ok = c_int::from(failure.is_none()) };
        Ok(())
    })
}

/// Smallest shift equivalence witness within bounds. Writes witness JSON,
/// or null when none exists within the bounds.
///
/// # Safety
/// `a` and `b` must be valid strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_se_search_json(
    a: *const c_char,
    b: *const c_char,
    max_lag: u32,
    max_entry: u64,
    out: *mut *mut c_char,
) -> LpaStatus {
    guard(|| {
        require_out(out)?;
        // SAFETY: caller contract.
        let (a, b) = unsafe { (read_str(a, "a")?, read_str(b, "b")?) };
        let a = serde_json::from_str::<MatrixJson>(a)?.to_matrix()?;
        let b = serde_json::from_str::<MatrixJson>(b)?.to_matrix()?;
        match search_se(&a, &b, max_lag, max_entry)? {
            Some(w) => write_json(&WitnessJson::from_witness(&w), out),
            None => {
                // SAFETY: checked non-null above.
                unsafe { *out = ptr::null_mut() };
                Ok(())
            }
        }
    })
}

/// Sets `*ok` to 1 when both commuting diagrams hold for a witness
/// `{"E", "F", "M", "N", "n", "omega_E", "omega_F", "sigma_M", "sigma_N"}`.
///
/// # Safety
/// `witness` must be a valid string, `field` null or a valid string, and `ok`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lpa_com_verify_json(
    witness: *const c_char,
    field: *const c_char,
    ok: *mut c_int,
) -> LpaStatus {
    guard(|| {
        require_out(ok)?;
        // SAFETY: caller contract.
        let (w, field) = unsafe { (read_str(witness, "witness")?, read_field(field)?) };
        let w = serde_json::from_str::<ComJson>(w)?.to_witness(field)?;
        let failure = com_failure(&w)?;
        // SAFETY: checked non-null above.
        unsafe { *ok = c_int::from(failure.is_none()) };
        Ok(())
    })
}

/// Runs the command-line interface on `argv` (without the program name).
/// Writes the exit code and the rendered report.
///
/// # Safety
/// `argv` must point to `argc` valid strings; `exit_code` and `report` must
/// be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lpa_cli_run(
    argv: *const *const c_char,
    argc: usize,
    exit_code: *mut c_int,
    report: *mut *mut c_char,
) -> LpaStatus {
    guard(|| {
        require_out(exit_code)?;
        require_out(report)?;
        if argv.is_null() && argc > 0 {
            return Err(Failure(LpaStatus::NullArgument, "argv is null".into()));
        }
        let mut args = vec!["lpa-bridge".to_string()];
        for i in 0..argc {
            // SAFETY: `argv` holds `argc` entries per the caller's contract.
            let arg = unsafe { read_str(*argv.add(i), "argument") }?;
            args.push(arg.to_string());
        }
        let outcome = lpa_bridge::cli::run(args);
        let text = if outcome.stdout.is_empty() {
            outcome.stderr
        } else {
            outcome.stdout
        };
        // SAFETY: both checked non-null above.
        unsafe {
            *exit_code = outcome.code;
            *report = into_c_string(text);
        }
        Ok(())
    })
}
