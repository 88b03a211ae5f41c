//! Software prefetch for gathered embedding rows.

const LINE: usize = 64;

/// Hint that `row` is about to be read.
#[inline(always)]
pub(crate) fn row<T>(row: &[T]) {
    #[cfg(target_arch = "x86_64")]
    {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        let base = row.as_ptr() as *const i8;
        let bytes = std::mem::size_of_val(row);
        let mut offset = 0;
        while offset < bytes {
            // SAFETY: prefetch never faults and the address lies inside `row`.
            unsafe { _mm_prefetch::<_MM_HINT_T0>(base.add(offset)) };
            offset += LINE;
        }
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = row;
}
