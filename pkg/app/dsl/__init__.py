# auto-generated package
