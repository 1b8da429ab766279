"""dihedralis engines."""
