"""Lattice Embed - Entry point."""

from lattice_embed.main import main

if __name__ == "__main__":
    main()
