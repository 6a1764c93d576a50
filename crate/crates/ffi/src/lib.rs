//! C interface to `hetex`.
//!
//! Every function returns a [`HetexStatus`]; results are written through out
//! pointers. Objects are opaque handles released with the matching `_free`
//! function. After a failure, [`hetex_last_error`] describes it on the calling
//! thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hetex::glcm::{compute_glcm, Angle, GlcmSpec};
use hetex::haralick::{describe_with, DESCRIPTOR_LEN};
use hetex::pattern::{build_signature, fit_normalization, ImageSignature, NormalizationStats};
use hetex::window::{decompose_with, whole_image_descriptor};
use hetex::{image_distance, load_grayscale, match_signatures, Error, ErrorKind, Method};
use hetex::{QuantizedImage, SignatureParams};

/// Result code of every call. Values 1 to 3 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HetexStatus {
    Ok = 0,
    Validation = 1,
    Io = 2,
    Internal = 3,
    /// A required pointer was null or a buffer was too small.
    InvalidArgument = 4,
    Panic = 5,
}

/// Distance method. Only the listed values may be passed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HetexMethod {
    Classical = 0,
    Heterogeneous = 1,
}

/// Signature parameters. The gray-level count is taken from the image.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HetexParams {
    pub patterns: u32,
    pub window_size: u32,
    pub trim_fraction: f64,
    pub seed: u64,
    pub symmetric: bool,
}

pub struct HetexImage(QuantizedImage);

pub struct HetexStats {
    stats: NormalizationStats,
    window_size: usize,
    symmetric: bool,
}

pub struct HetexSignature(ImageSignature);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HetexStatus {
    match e.kind() {
        ErrorKind::Validation => HetexStatus::Validation,
        ErrorKind::Io => HetexStatus::Io,
        ErrorKind::Internal => HetexStatus::Internal,
    }
}

struct Fail(HetexStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(HetexStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HetexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HetexStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HetexStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn hetex_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hetex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn hetex_default_params() -> HetexParams {
    HetexParams {
        patterns: 2,
        window_size: 8,
        trim_fraction: 0.25,
        seed: 42,
        symmetric: true,
    }
}

/// Load a PGM or PNG file and quantize it to `levels` gray levels.
#[no_mangle]
pub unsafe extern "C" fn hetex_image_load(
    path: *const c_char,
    levels: u16,
    out: *mut *mut HetexImage,
) -> HetexStatus {
    guard(|| {
        if path.is_null() {
            return Err(invalid("path is null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let img = load_grayscale(path, levels)?;
        put(out, HetexImage(img))
    })
}

/// Quantize a row-major 8-bit buffer of `width * height` bytes.
#[no_mangle]
pub unsafe extern "C" fn hetex_image_from_gray8(
    width: usize,
    height: usize,
    pixels: *const u8,
    len: usize,
    levels: u16,
    out: *mut *mut HetexImage,
) -> HetexStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(invalid("pixels is null"));
        }
        if width.checked_mul(height) != Some(len) {
            return Err(invalid("len does not equal width * height"));
        }
        let data = std::slice::from_raw_parts(pixels, len);
        let img = QuantizedImage::from_gray8(width, height, data, levels)?;
        put(out, HetexImage(img))
    })
}

#[no_mangle]
pub unsafe extern "C" fn hetex_image_free(img: *mut HetexImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Width in pixels, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn hetex_image_width(img: *const HetexImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.width())
}

#[no_mangle]
pub unsafe extern "C" fn hetex_image_height(img: *const HetexImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.height())
}

#[no_mangle]
pub unsafe extern "C" fn hetex_image_levels(img: *const HetexImage) -> u16 {
    img.as_ref().map_or(0, |i| i.0.levels())
}

/// Whole-image descriptor; `out` must hold 32 values.
#[no_mangle]
pub unsafe extern "C" fn hetex_image_describe(
    img: *const HetexImage,
    symmetric: bool,
    out: *mut f64,
) -> HetexStatus {
    guard(|| {
        let img = deref(img, "image")?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let d = describe_with(&img.0, symmetric)?;
        std::slice::from_raw_parts_mut(out, DESCRIPTOR_LEN).copy_from_slice(d.values());
        Ok(())
    })
}

/// Normalized co-occurrence matrix, row-major; `out` must hold `levels * levels` values.
#[no_mangle]
pub unsafe extern "C" fn hetex_image_glcm(
    img: *const HetexImage,
    distance: usize,
    angle_degrees: u32,
    symmetric: bool,
    out: *mut f64,
    out_len: usize,
) -> HetexStatus {
    guard(|| {
        let img = deref(img, "image")?;
        let g = usize::from(img.0.levels());
        if out.is_null() || out_len < g * g {
            return Err(invalid(
                "output buffer is null or shorter than levels * levels",
            ));
        }
        let angle = Angle::from_degrees(angle_degrees).ok_or_else(|| {
            Fail(
                HetexStatus::Validation,
                format!("angle {angle_degrees} is not one of 0, 45, 90, 135"),
            )
        })?;
        let spec = GlcmSpec::new(distance, angle, img.0.levels(), symmetric)?;
        let m = compute_glcm(&img.0, &spec)?;
        std::slice::from_raw_parts_mut(out, g * g).copy_from_slice(m.probabilities());
        Ok(())
    })
}

/// Fit normalization statistics over the windows of `count` images.
#[no_mangle]
pub unsafe extern "C" fn hetex_stats_fit(
    images: *const *const HetexImage,
    count: usize,
    window_size: u32,
    symmetric: bool,
    out: *mut *mut HetexStats,
) -> HetexStatus {
    guard(|| {
        if images.is_null() || count == 0 {
            return Err(invalid("images is null or empty"));
        }
        let size = window_size as usize;
        let mut windows = Vec::with_capacity(count);
        for &p in std::slice::from_raw_parts(images, count) {
            windows.push(decompose_with(&deref(p, "image")?.0, size, symmetric)?);
        }
        let stats = fit_normalization(windows.iter().flat_map(|w| w.descriptors()))?;
        put(
            out,
            HetexStats {
                stats,
                window_size: size,
                symmetric,
            },
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn hetex_stats_free(stats: *mut HetexStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

/// Build the pattern signature of `img`. The window size and symmetry must
/// match those the statistics were fitted with.
#[no_mangle]
pub unsafe extern "C" fn hetex_signature_build(
    img: *const HetexImage,
    stats: *const HetexStats,
    params: *const HetexParams,
    out: *mut *mut HetexSignature,
) -> HetexStatus {
    guard(|| {
        let img = deref(img, "image")?;
        let stats = deref(stats, "stats")?;
        let p = deref(params, "params")?;
        if p.window_size as usize != stats.window_size || p.symmetric != stats.symmetric {
            return Err(Fail(
                HetexStatus::Validation,
                "params disagree with the window size or symmetry of the statistics".into(),
            ));
        }
        let params = SignatureParams {
            k: p.patterns as usize,
            window_size: p.window_size as usize,
            gray_levels: img.0.levels(),
            trim_fraction: p.trim_fraction,
            seed: p.seed,
            symmetric: p.symmetric,
        };
        let win = decompose_with(&img.0, params.window_size, params.symmetric)?;
        let classical = whole_image_descriptor(std::slice::from_ref(&img.0), params.symmetric)?;
        let (sig, _) = build_signature("", &win, &classical, &params, &stats.stats)?;
        put(out, HetexSignature(sig))
    })
}

#[no_mangle]
pub unsafe extern "C" fn hetex_signature_free(sig: *mut HetexSignature) {
    if !sig.is_null() {
        drop(Box::from_raw(sig));
    }
}

/// Number of patterns, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn hetex_signature_pattern_count(sig: *const HetexSignature) -> usize {
    sig.as_ref().map_or(0, |s| s.0.patterns.len())
}

/// Distance between two signatures built with the same statistics and parameters.
#[no_mangle]
pub unsafe extern "C" fn hetex_signature_distance(
    a: *const HetexSignature,
    b: *const HetexSignature,
    method: HetexMethod,
    out: *mut f64,
) -> HetexStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let m = match method {
            HetexMethod::Classical => Method::Classical,
            HetexMethod::Heterogeneous => Method::Heterogeneous,
        };
        *out = image_distance(&a.0, &b.0, m)?;
        Ok(())
    })
}

/// Cheapest one-to-one pattern matching. `permutation[i]` receives the pattern
/// of `b` matched to pattern `i` of `a`; it must hold `perm_len >= k` entries.
#[no_mangle]
pub unsafe extern "C" fn hetex_signature_match(
    a: *const HetexSignature,
    b: *const HetexSignature,
    permutation: *mut usize,
    perm_len: usize,
    total_cost: *mut f64,
) -> HetexStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let r = match_signatures(&a.0, &b.0)?;
        if permutation.is_null() || perm_len < r.permutation.len() || total_cost.is_null() {
            return Err(invalid(
                "output pointer is null or permutation buffer too short",
            ));
        }
        std::slice::from_raw_parts_mut(permutation, r.permutation.len())
            .copy_from_slice(&r.permutation);
        *total_cost = r.total_cost;
        Ok(())
    })
}
