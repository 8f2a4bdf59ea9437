int fsl_mc_device_add(struct fsl_mc_obj_desc *obj_desc,
		      struct fsl_mc_io *mc_io,
		      struct device *parent_dev,
		      struct fsl_mc_device **new_mc_dev)
{
	int error;
	struct fsl_mc_device *mc_dev = NULL;
	struct fsl_mc_bus *mc_bus = NULL;

	mc_dev = kzalloc(sizeof(*mc_dev), GFP_KERNEL);
	if (!mc_dev)
		return -ENOMEM;

	mc_dev->obj_desc = *obj_desc;
	mc_dev->mc_io = mc_io;
	device_initialize(&mc_dev->dev);
	mc_dev->dev.parent = parent_dev;
	mc_dev->dev.bus = &fsl_mc_bus_type;
	mc_dev->dev.release = fsl_mc_device_release;
	dev_set_name(&mc_dev->dev, "%s.%d", obj_desc->type, obj_desc->id);

	error = fsl_mc_device_get_mmio_regions(mc_dev, parent_mc_dev);
	if (error < 0)
		goto error_cleanup_dev;

	error = device_add(&mc_dev->dev);
	if (error < 0) {
		dev_err(parent_dev, "device_add() failed: %d\n", error);
		goto error_cleanup_dev;
	}

	*new_mc_dev = mc_dev;
	return 0;

error_cleanup_dev:
	kfree(mc_dev->regions);
	put_device(&mc_dev->dev);

	return error;
}
